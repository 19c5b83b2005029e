"""Rewrite scalar-pointer parameters as fixed-extent array parameters."""

from __future__ import annotations

from typing import Mapping

from ..csrc.lexer import KEYWORDS, int_value
from ..csrc.model import FunctionInfo, ParamInfo, SourceUnit, Span
from ..errors import UnknownExtent, UnknownFunction
from .patch import DeterministicRule, Patch

RULE = DeterministicRule("pointers_to_arrays")


def _unary_star(toks, pairs, k: int) -> bool:
    """Is the '*' at k a dereference rather than a multiplication?"""
    prev = toks[k - 1]
    if prev.text == ")":
        # closing a control header: `for (...) *p = 0;`
        opener = next((o for o, c in pairs.items() if c == k - 1), None)
        return opener is not None and toks[opener - 1].text in ("for", "if", "while", "switch")
    if prev.kind in ("number", "string", "char"):
        return False
    if prev.kind == "ident":
        return prev.text in KEYWORDS and prev.text not in ("sizeof",)
    return prev.text not in (")", "]", "++", "--")


def _array_extent(unit: SourceUnit, caller: FunctionInfo, name: str) -> int | None:
    """Literal extent of an array named ``name`` visible in ``caller``."""
    for p in caller.params:
        if p.name == name:
            if len(p.dims) == 1:
                return int_value(p.dims[0])
            return None
    toks = unit.tokens
    for st in caller.statements:
        if st.kind != "decl":
            continue
        for k in range(st.tok_start, st.tok_end - 3):
            if toks[k].text == name and toks[k].kind == "ident" and toks[k + 1].text == "[":
                close = unit.pairs[k + 1]
                if close == k + 3:
                    return int_value(toks[k + 2].text)
                return None
    g = unit.global_(name)
    if g is not None and g.is_array and len(g.dims) == 1:
        return g.element_count
    return None


def _call_args(unit: SourceUnit, name_tok: int) -> list[tuple[int, int]]:
    from .memory import split_args

    return split_args(unit, name_tok + 1, unit.pairs[name_tok + 1])


def _call_site_extent(unit: SourceUnit, fn: FunctionInfo, index: int) -> int | None:
    found: set[int | None] = set()
    toks = unit.tokens
    for caller in unit.functions:
        for c in caller.calls:
            if c.callee != fn.name:
                continue
            args = _call_args(unit, c.name_tok)
            if index >= len(args):
                return None
            a, b = args[index]
            if b - a == 1 and toks[a].kind == "ident":
                found.add(_array_extent(unit, caller, toks[a].text))
            else:
                found.add(None)
    if len(found) == 1:
        return found.pop()
    return None


class _Rewriter:
    def __init__(self, unit: SourceUnit, fn: FunctionInfo):
        self.unit = unit
        self.fn = fn

    def rewrites(self, p: ParamInfo) -> tuple[list[tuple[Span, str]], list[int]]:
        """Replacements for every use of ``p`` plus extents implied by callees."""
        unit, toks, pairs = self.unit, self.unit.tokens, self.unit.pairs
        lo, hi = self.fn.tok_range
        reps: list[tuple[Span, str]] = []
        implied: list[int] = []
        k = lo + 1
        while k < hi:
            t = toks[k]
            if t.kind != "ident" or t.text != p.name or toks[k - 1].text in (".", "->"):
                k += 1
                continue
            prev, nxt = toks[k - 1], toks[k + 1]
            # p[i]
            if nxt.text == "[" and not (prev.text in ("++", "--", "&")):
                k += 1
                continue
            # *p
            if prev.text == "*" and _unary_star(toks, pairs, k - 1) and nxt.text not in ("++", "--", "["):
                reps.append((Span(prev.start, t.end), f"{p.name}[0]"))
                k += 1
                continue
            # *(p + e)  |  *(p)
            if (
                prev.text == "(" and toks[k - 2].text == "*" and _unary_star(toks, pairs, k - 2)
            ):
                close = pairs[k - 1]
                if close == k + 1:
                    reps.append((Span(toks[k - 2].start, toks[close].end), f"{p.name}[0]"))
                    k = close + 1
                    continue
                if nxt.text == "+":
                    idx = unit.text[toks[k + 2].start:toks[close - 1].end]
                    reps.append((Span(toks[k - 2].start, toks[close].end), f"{p.name}[{idx}]"))
                    k = close + 1
                    continue
            # whole argument of a call
            if prev.text in ("(", ",") and nxt.text in (")", ","):
                callee = self.callee_of(k)
                if callee is not None:
                    if callee[0] is not None:
                        implied.append(callee[0])
                    k += 1
                    continue
            raise UnknownExtent(p.name)
        return reps, implied

    def callee_of(self, k: int) -> tuple[int | None, str] | None:
        """If token k is a call argument, the callee's declared extent for it."""
        for c in self.fn.calls:
            args = _call_args(self.unit, c.name_tok)
            for i, (a, b) in enumerate(args):
                if a == k and b == k + 1:
                    g = self.unit.function(c.callee)
                    if g is not None and i < len(g.params) and len(g.params[i].dims) == 1:
                        return int_value(g.params[i].dims[0]), c.callee
                    return None, c.callee
        return None


def pointers_to_arrays(
    unit: SourceUnit, fn: str, extents: Mapping[str, int] | None = None
) -> Patch:
    f = unit.function(fn)
    if f is None:
        raise UnknownFunction(fn)
    extents = dict(extents or {})
    rw = _Rewriter(unit, f)
    reps: list[tuple[Span, str]] = []
    for i, p in enumerate(f.params):
        if (
            p.pointer_depth != 1 or p.dims or p.is_aggregate or p.is_void_pointer
            or p.is_function_pointer
        ):
            continue
        uses, implied = rw.rewrites(p)
        n = extents.get(f"{fn}.{p.name}", extents.get(p.name))
        if n is None:
            n = _call_site_extent(unit, f, i)
        if n is None and implied and len(set(implied)) == 1:
            n = implied[0]
        if n is None or n <= 0:
            raise UnknownExtent(p.name)
        reps.append((p.span, f"{p.base} {p.name}[{n}]"))
        reps.extend(uses)
    if not reps:
        return Patch.empty(RULE, "no pointer parameters")
    return Patch.build(reps, RULE, f"array-style parameters for {fn}")
