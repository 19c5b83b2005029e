"""Prompt templates: plain-text files with ``${name}`` placeholders."""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import ConfigError, MissingBinding


class TemplateId(str, Enum):
    StaticMemory = "StaticMemory"
    StructExpansion = "StructExpansion"
    Extraction = "Extraction"
    CorrectiveCompile = "CorrectiveCompile"
    CorrectiveKat = "CorrectiveKat"
    CorrectiveSynth = "CorrectiveSynth"
    PragmaDse = "PragmaDse"

    @property
    def filename(self) -> str:
        out = []
        for i, c in enumerate(self.value):
            if c.isupper() and i:
                out.append("_")
            out.append(c.lower())
        return "".join(out) + ".txt"


@dataclass(frozen=True)
class PromptTemplate:
    id: TemplateId
    body: str

    @property
    def placeholders(self) -> list[str]:
        seen: list[str] = []
        for m in string.Template.pattern.finditer(self.body):
            name = m.group("named") or m.group("braced")
            if name and name not in seen:
                seen.append(name)
        return seen


def load_template(tid: TemplateId | str, directory: Path | str | None = None) -> PromptTemplate:
    """User directory first, packaged defaults otherwise."""
    tid = TemplateId(tid)
    if directory is not None:
        p = Path(directory) / tid.filename
        if p.is_file():
            return PromptTemplate(tid, p.read_text(encoding="utf-8"))
    try:
        body = resources.files(__package__).joinpath("prompts", tid.filename).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"no template file for {tid.value}") from exc
    return PromptTemplate(tid, body)


def render_prompt(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    for name in template.placeholders:
        if name not in bindings:
            raise MissingBinding(name)
    try:
        return string.Template(template.body).substitute(bindings)
    except ValueError as exc:
        raise ConfigError(f"template {template.id.value}: {exc}") from exc
