"""Corrective prompts that feed tool evidence back to the model."""

from __future__ import annotations

from enum import Enum
from pathlib import Path

from .settings import LlmSettings
from .templates import TemplateId, load_template, render_prompt

CHARS_PER_TOKEN = 4
MIN_EVIDENCE_CHARS = 512
TRUNCATION_MARKER = "[... evidence truncated: {n} more characters ...]"


class CorrectiveKind(str, Enum):
    CompileError = "CompileError"
    KatMismatch = "KatMismatch"
    SynthError = "SynthError"

    @property
    def template(self) -> TemplateId:
        return {
            "CompileError": TemplateId.CorrectiveCompile,
            "KatMismatch": TemplateId.CorrectiveKat,
            "SynthError": TemplateId.CorrectiveSynth,
        }[self.value]


def truncate_evidence(evidence: str, limit: int) -> str:
    if len(evidence) <= limit:
        return evidence
    return evidence[:limit] + "\n" + TRUNCATION_MARKER.format(n=len(evidence) - limit)


def corrective_prompt(
    kind: CorrectiveKind | str,
    code: str,
    evidence: str,
    settings: LlmSettings | None = None,
    template_dir: Path | str | None = None,
) -> str:
    if not evidence:
        raise ValueError("corrective prompt needs non-empty evidence")
    kind = CorrectiveKind(kind)
    settings = settings or LlmSettings()
    tpl = load_template(kind.template, template_dir)
    room = settings.max_tokens * CHARS_PER_TOKEN - len(tpl.body) - len(code)
    evidence = truncate_evidence(evidence, max(MIN_EVIDENCE_CHARS, room))
    return render_prompt(tpl, {"code": code, "evidence": evidence})
