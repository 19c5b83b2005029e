"""Detection of constructs that keep C code from being synthesized."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable

from .csrc.ctypes import TypeEnv
from .csrc.model import SourceUnit, Span
from .errors import UnknownFunction

CATEGORIES = (
    "MathLibCall", "FloatingPoint", "DynamicMemory", "RuntimeInit",
    "AggregateInterface", "PointerInterface",
)
MATH_CALLS = frozenset({"sin", "cos", "tan", "pow", "sqrt", "log", "exp", "floor", "round", "fabs"})
# usually accepted by HLS tools, so reported with lower severity
REVIEW_CALLS = frozenset({"floor", "fabs"})
ALLOC_CALLS = frozenset({"malloc", "calloc", "realloc", "free"})


@dataclass(frozen=True, order=True)
class BlockerEntry:
    span: Span
    category: str
    function: str
    detail: str

    def line(self) -> str:
        return f"{self.category}\t{self.function}\t{self.span.start}..{self.span.end}\t{self.detail}"


@dataclass(frozen=True)
class BlockerReport:
    entries: tuple[BlockerEntry, ...]
    unit_digest: str

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def clean(self) -> bool:
        return not self.entries

    def by_category(self, category: str) -> list[BlockerEntry]:
        return [e for e in self.entries if e.category == category]

    def counts(self) -> dict[str, int]:
        out = {c: 0 for c in CATEGORIES}
        for e in self.entries:
            out[e.category] += 1
        return out

    def to_text(self) -> str:
        return "".join(e.line() + "\n" for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "unit_digest": self.unit_digest,
            "entries": [
                {"category": e.category, "function": e.function,
                 "span": [e.span.start, e.span.end], "detail": e.detail}
                for e in self.entries
            ],
        }


@dataclass(frozen=True)
class InitCheck:
    """Verdict of :func:`is_init_function`; truthy when the function qualifies."""

    is_init: bool
    globals_written: tuple[str, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.is_init


def unit_digest(unit: SourceUnit) -> str:
    return hashlib.sha256(unit.text.encode("utf-8", "surrogateescape")).hexdigest()


def _param_read(unit: SourceUnit, fn_name: str) -> list[str]:
    f = unit.function(fn_name)
    names = {p.name for p in f.params}
    lo, hi = f.tok_range
    used = []
    for t in unit.tokens[lo + 1:hi]:
        if t.kind == "ident" and t.text in names and t.text not in used:
            used.append(t.text)
    return used


def is_init_function(unit: SourceUnit, fn: str) -> InitCheck:
    f = unit.function(fn)
    if f is None:
        raise UnknownFunction(fn)
    arrays = tuple(
        g for g in f.writes_globals
        if (info := unit.global_(g)) is not None and info.is_array
    )
    if not arrays:
        return InitCheck(False, (), "writes no global array")
    read = _param_read(unit, fn)
    if read:
        return InitCheck(False, arrays, f"reads parameter {read[0]}")
    for other in unit.functions:
        if other.name == fn:
            continue
        for c in other.calls:
            if c.callee == fn and c.in_loop:
                return InitCheck(False, arrays, f"called inside a loop of {other.name}")
    return InitCheck(True, arrays, "")


def _float_names(unit: SourceUnit, env: TypeEnv) -> set[str]:
    names = {"float", "double"}
    for name in unit.typedef_names:
        r = env.resolve(name)
        if r.scalar is not None and r.scalar.kind == "f":
            names.add(name)
    return names


def scan(unit: SourceUnit, math_calls: Iterable[str] | None = None) -> BlockerReport:
    math = frozenset(math_calls) if math_calls is not None else MATH_CALLS
    env = TypeEnv(unit)
    floats = _float_names(unit, env)
    defined = set(unit.function_names)
    found: set[BlockerEntry] = set()
    toks = unit.tokens
    for f in unit.functions:
        for c in f.calls:
            if c.callee in defined:
                continue
            if c.callee in math:
                detail = f"call to {c.callee}"
                if c.callee in REVIEW_CALLS:
                    detail += " (review)"
                found.add(BlockerEntry(c.span, "MathLibCall", f.name, detail))
            elif c.callee in ALLOC_CALLS:
                found.add(BlockerEntry(c.span, "DynamicMemory", f.name, f"call to {c.callee}"))
        for t in toks:
            if t.start < f.span.start:
                continue
            if t.end > f.span.end:
                break
            if t.kind == "ident" and t.text in floats:
                found.add(BlockerEntry(Span(t.start, t.end), "FloatingPoint", f.name,
                                       f"floating-point type {t.text}"))
        for p in f.params:
            if p.is_function_pointer:
                continue
            if p.is_aggregate or p.is_void_pointer:
                kind = "opaque context pointer" if p.is_void_pointer else "aggregate parameter"
                found.add(BlockerEntry(p.span, "AggregateInterface", f.name, f"{kind} {p.name}"))
            elif p.is_pointer and p.pointer_depth == 1:
                found.add(BlockerEntry(p.span, "PointerInterface", f.name, f"pointer parameter {p.name}"))
        check = is_init_function(unit, f.name)
        if check:
            found.add(BlockerEntry(f.name_span, "RuntimeInit", f.name,
                                   "initializes " + ", ".join(check.globals_written)))
    entries = tuple(sorted(found, key=lambda e: (e.span.start, e.category, e.span.end)))
    return BlockerReport(entries, unit_digest(unit))


def parse_report_text(text: str, digest: str = "") -> BlockerReport:
    """Inverse of :meth:`BlockerReport.to_text`."""
    entries = []
    for line in text.splitlines():
        if not line.strip():
            continue
        category, function, span, detail = line.split("\t", 3)
        a, b = span.split("..")
        entries.append(BlockerEntry(Span(int(a), int(b)), category, function, detail))
    return BlockerReport(tuple(entries), digest)

