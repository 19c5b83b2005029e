from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

from ..csrc.model import SourceUnit, Span
from ..csrc.parser import parse_unit
from ..errors import OverlappingSpans, PostPatchParseFailure, SpanOutOfBounds, UnsupportedConstruct


@dataclass(frozen=True)
class DeterministicRule:
    name: str

    def __str__(self) -> str:
        return f"rule:{self.name}"


@dataclass(frozen=True)
class LlmExchangeRef:
    id: str

    def __str__(self) -> str:
        return f"llm:{self.id}"


Provenance = Union[DeterministicRule, LlmExchangeRef]


@dataclass(frozen=True)
class Replacement:
    span: Span
    text: str


@dataclass(frozen=True)
class Patch:
    replacements: tuple[Replacement, ...]
    provenance: Provenance
    description: str
    # generated companion files (e.g. constant-table headers), name -> text
    files: tuple[tuple[str, str], ...] = field(default=())

    @property
    def is_empty(self) -> bool:
        return not self.replacements and not self.files

    @classmethod
    def empty(cls, provenance: Provenance, description: str) -> "Patch":
        return cls((), provenance, description)

    @classmethod
    def build(
        cls,
        replacements: Iterable[tuple[Span | tuple[int, int], str] | Replacement],
        provenance: Provenance,
        description: str,
        files: dict[str, str] | None = None,
    ) -> "Patch":
        """Sort replacements and merge insertions that share a position."""
        reps = []
        for r in replacements:
            if not isinstance(r, Replacement):
                span, text = r
                r = Replacement(Span(*span), text)
            reps.append(r)
        # zero-width insertions sort before a replacement starting at the same offset
        reps.sort(key=lambda r: (r.span.start, r.span.end))
        merged: list[Replacement] = []
        for r in reps:
            if (
                merged and r.span.start == r.span.end == merged[-1].span.start == merged[-1].span.end
            ):
                merged[-1] = Replacement(r.span, merged[-1].text + r.text)
            else:
                merged.append(r)
        return cls(tuple(merged), provenance, description, tuple(sorted((files or {}).items())))

    def validate(self, length: int) -> None:
        prev: Replacement | None = None
        for r in self.replacements:
            a, b = r.span
            if a < 0 or b > length or a > b:
                raise SpanOutOfBounds(f"span {a}..{b} outside 0..{length}")
            if prev is not None:
                pa, pb = prev.span
                if a < pb or a < pa or (a == pa and pa == pb and a == b):
                    raise OverlappingSpans(f"span {a}..{b} overlaps or precedes {pa}..{pb}")
            prev = r


def splice(text: str, replacements: Iterable[Replacement]) -> str:
    out = []
    pos = 0
    for r in replacements:
        out.append(text[pos:r.span.start])
        out.append(r.text)
        pos = r.span.end
    out.append(text[pos:])
    return "".join(out)


def apply(unit: SourceUnit, patch: Patch) -> SourceUnit:
    """Return the unit parsed from the patched text; ``unit`` is not modified."""
    patch.validate(len(unit.text))
    if not patch.replacements:
        return unit
    text = splice(unit.text, patch.replacements)
    try:
        return parse_unit(text)
    except UnsupportedConstruct as exc:
        raise PostPatchParseFailure(exc) from exc


def whole_text_patch(unit: SourceUnit, new_text: str, provenance: Provenance, description: str) -> Patch:
    """Replace everything; used for LLM-produced rewrites."""
    if new_text == unit.text:
        return Patch.empty(provenance, description)
    return Patch((Replacement(Span(0, len(unit.text)), new_text),), provenance, description)
