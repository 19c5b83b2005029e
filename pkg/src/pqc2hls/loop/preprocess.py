"""Preprocessing: static memory, init removal, pointer rewriting, each verified."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..blockers import is_init_function, scan
from ..errors import (
    LlmError,
    NotStaticallySizable,
    PreprocessExhausted,
    TransformError,
)
from ..llm.corrective import CorrectiveKind, corrective_prompt
from ..llm.session import LlmSession
from ..llm.templates import TemplateId, load_template, render_prompt
from ..xform.initrm import header_name, remove_runtime_init
from ..xform.memory import map_static_memory
from ..xform.patch import apply
from ..xform.pointers import pointers_to_arrays
from .kernel import Check, Kernel, build_only, run_check
from .services import Services
from .transcript import COMPILE, KATSIM, AttemptStore, RunTranscript, StageRecord, code_digest


@dataclass
class StepReport:
    name: str
    applied: bool
    provenance: str = ""
    warning: str = ""


@dataclass
class PreprocessResult:
    kernel: Kernel
    steps: list[StepReport] = field(default_factory=list)

    @property
    def warnings(self) -> list[str]:
        return [s.warning for s in self.steps if s.warning]


def ask_for_code(session: LlmSession | None, prompt: str, template: TemplateId) -> tuple[str, str]:
    """(code, exchange id); raises LlmError when nothing usable comes back."""
    if session is None:
        raise LlmError("no LLM session available")
    ex = session.request(prompt, template.value)
    if ex.extracted_code is None:
        raise LlmError(f"exchange {ex.id} returned no code")
    return ex.extracted_code, ex.id


class Verifier:
    """Compile + KAT a candidate, recording stages when a transcript is attached."""

    def __init__(self, kernel: Kernel, services: Services, workdir: Path,
                 transcript: RunTranscript | None = None, store: AttemptStore | None = None):
        self.kernel = kernel
        self.services = services
        self.workdir = Path(workdir)
        self.transcript = transcript
        self.store = store
        self.n = 0

    def record(self, rec: StageRecord) -> None:
        if self.transcript is not None:
            self.transcript.add(rec)
        if self.store is not None:
            self.store.stage(rec)

    def __call__(self, code: str, headers: dict[str, str] | None = None) -> Check:
        self.n += 1
        wd = self.workdir / f"build{self.n:03d}"
        digest = self.store.code(code, headers) if self.store is not None else code_digest(code)
        res, log = build_only(self.kernel, code, self.services.toolchain, wd, headers)
        if res is None:
            self.record(StageRecord(COMPILE, digest, False, "compile failed", log))
            return Check(False, log)
        self.record(StageRecord(COMPILE, digest, True, "compiled"))
        result = run_check(self.kernel, res.binary, self.services.toolchain, log)
        if result.ok:
            self.record(StageRecord(KATSIM, digest, True, f"{result.kat.passed}/{result.kat.total} KATs pass"))
        else:
            self.record(StageRecord(KATSIM, digest, False, "KAT failure", result.evidence))
        return result


def _apply_text(kernel: Kernel, patch) -> tuple[str, dict[str, str]]:
    return apply(kernel.unit, patch).text, dict(patch.files)


def preprocess(
    kernel: Kernel,
    services: Services,
    workdir: Path | str,
    session: LlmSession | None = None,
    transcript: RunTranscript | None = None,
    store: AttemptStore | None = None,
) -> PreprocessResult:
    cfg = services.config
    workdir = Path(workdir)
    verify = Verifier(kernel, services, workdir, transcript, store)
    result = PreprocessResult(kernel)
    rejected = services.rejected_categories
    tdir = cfg.resolve(cfg.llm.template_dir) if cfg.llm.template_dir else None

    def step(name: str, produce: Callable[[Kernel], tuple[str, dict[str, str], str] | None], mandatory: bool) -> None:
        cur = result.kernel
        try:
            produced = produce(cur)
        except (TransformError, LlmError) as exc:
            return fail(name, f"{name}: {exc}", mandatory)
        if produced is None:
            return
        code, headers, provenance = produced
        outcome = verify(code, {**cur.headers, **headers})
        rounds = 0
        while not outcome.ok and rounds < cfg.loop.retries_per_step:
            rounds += 1
            kind = CorrectiveKind.CompileError if not outcome.compiled else CorrectiveKind.KatMismatch
            prompt = corrective_prompt(kind, code, outcome.evidence, cfg.llm.settings, tdir)
            try:
                code, xid = ask_for_code(session, prompt, kind.template)
            except LlmError as exc:
                return fail(name, f"{name}: corrective round failed: {exc}", mandatory)
            provenance = f"llm:{xid}"
            outcome = verify(code, {**cur.headers, **headers})
        if not outcome.ok:
            return fail(name, f"{name}: reverted, still failing after {rounds} corrective rounds", mandatory)
        result.kernel = cur.with_code(code, headers)
        result.steps.append(StepReport(name, True, provenance))

    def fail(name: str, warning: str, mandatory: bool) -> None:
        result.steps.append(StepReport(name, False, warning=warning))
        if transcript is not None:
            transcript.warnings.append(warning)
        if mandatory:
            raise PreprocessExhausted(warning)

    # 1. static memory mapping, falling back to the model for non-constant sizes
    def memory(k: Kernel):
        if not scan(k.unit).by_category("DynamicMemory"):
            return None
        try:
            patch = map_static_memory(k.unit)
        except NotStaticallySizable:
            tpl = load_template(TemplateId.StaticMemory, tdir)
            code, xid = ask_for_code(session, render_prompt(tpl, {"code": k.code}), TemplateId.StaticMemory)
            return code, {}, f"llm:{xid}"
        if patch.is_empty:
            return None
        code, files = _apply_text(k, patch)
        return code, files, str(patch.provenance)

    mandatory_mem = "DynamicMemory" in rejected and bool(scan(kernel.unit).by_category("DynamicMemory"))
    step("map_static_memory", memory, mandatory_mem)

    # 2. runtime initialization removal for every initializer
    report = scan(result.kernel.unit)
    inits = [f.name for f in result.kernel.unit.functions
             if f.name != kernel.top_fn and is_init_function(result.kernel.unit, f.name)]
    for fn in inits:
        def init(k: Kernel, fn=fn):
            stem = "kernel" if header_name("kernel") not in k.headers else f"kernel_{fn}"
            patch, _ = remove_runtime_init(k.unit, fn, services.toolchain, workdir / f"init_{fn}", stem)
            if patch.is_empty:
                return None
            code, files = _apply_text(k, patch)
            return code, files, str(patch.provenance)

        has_math = any(e.function == fn for e in report.by_category("MathLibCall"))
        step(f"remove_runtime_init:{fn}", init, "MathLibCall" in rejected and has_math)

    # 3. array-style parameters on the top function
    def pointers(k: Kernel):
        patch = pointers_to_arrays(k.unit, k.top_fn, k.extents)
        if patch.is_empty:
            return None
        code, files = _apply_text(k, patch)
        return code, files, str(patch.provenance)

    step("pointers_to_arrays", pointers, False)
    return result
