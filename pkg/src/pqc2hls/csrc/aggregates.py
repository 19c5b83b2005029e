"""Primitive leaves of aggregates and how a function touches them."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import FlattenError, RecursiveAggregate
from .ctypes import TypeEnv
from .model import FieldDecl, FunctionInfo, SourceUnit, StructDef
from .parser import _is, is_write


@dataclass(frozen=True)
class Leaf:
    path: tuple[str, ...]  # naming path; union member names are dropped
    chain: tuple[str, ...]  # member access chain from the aggregate root
    base: str
    pointer_depth: int
    dims: tuple[str, ...]

    @property
    def name(self) -> str:
        return "_".join(self.path)

    @property
    def access(self) -> str:
        return ".".join(self.chain)

    @property
    def is_array(self) -> bool:
        return bool(self.dims)

    def declaration(self, name: str, by_ref: bool = False) -> str:
        stars = "*" * self.pointer_depth
        dims = "".join(f"[{d}]" for d in self.dims)
        if by_ref and not self.dims:
            dims = "[1]"
        return f"{self.base} {stars}{name}{dims}"

    def type_text(self) -> str:
        stars = "*" * self.pointer_depth
        dims = "".join(f"[{d}]" for d in self.dims)
        return f"{self.base}{' ' + stars if stars else ''}{dims}"


def struct_leaves(env: TypeEnv, struct: StructDef, depth_limit: int = 4) -> list[Leaf]:
    """Leaves in declaration order; nested aggregates are expanded in place."""
    out: list[Leaf] = []

    def field_struct(f: FieldDecl) -> StructDef | None:
        if f.pointer_depth:
            return None
        if f.nested is not None:
            return f.nested
        return env.resolve(f.base).struct

    def add(f: FieldDecl, path: tuple[str, ...], chain: tuple[str, ...], depth: int) -> None:
        nested = field_struct(f)
        if nested is None:
            out.append(Leaf(path, chain, f.base, f.pointer_depth, f.dims))
            return
        if f.dims:
            raise FlattenError(f"array of aggregates in field {'.'.join(chain)}")
        walk(nested, path, chain, depth + 1)

    def walk(s: StructDef, path: tuple[str, ...], chain: tuple[str, ...], depth: int) -> None:
        if depth > depth_limit:
            raise RecursiveAggregate(".".join(chain) or (s.tag or "<anonymous>"), depth_limit)
        if not s.fields:
            raise FlattenError(f"aggregate {s.tag or '.'.join(chain)} has no known fields")
        if s.kind == "union":
            first = s.fields[0]
            add(first, path, chain + (first.name,), depth)
            return
        for f in s.fields:
            add(f, path + (f.name,), chain + (f.name,), depth)

    walk(struct, (), (), 1)
    return out


@dataclass(frozen=True)
class Use:
    """One occurrence of an aggregate variable inside a function body."""

    start: int  # character span to replace
    end: int
    chain: tuple[str, ...]
    kind: str  # access | addr | sizeof | arg
    write: bool = False
    callee: str | None = None
    arg_index: int = -1
    first_tok: int = -1  # first token of the occurrence (the '&' if any)
    next_tok: int = -1  # token right after it


def call_arguments(unit: SourceUnit, fn: FunctionInfo) -> dict[int, tuple[str, int, int]]:
    """Map first token of each call argument to (callee, index, end token)."""
    toks = unit.tokens
    pairs = _pairs(unit)
    out: dict[int, tuple[str, int, int]] = {}
    for call in fn.calls:
        open_ = call.name_tok + 1
        close = pairs[open_]
        start = open_ + 1
        idx = 0
        i = start
        while i <= close:
            t = toks[i]
            if i == close or _is(t, ","):
                if i > start:
                    out[start] = (call.callee, idx, i)
                idx += 1
                start = i + 1
                i += 1
                continue
            if t.kind == "punct" and t.text in "([{":
                i = pairs[i] + 1
                continue
            i += 1
    return out


def _pairs(unit: SourceUnit) -> dict[int, int]:
    return unit.pairs


def find_uses(
    unit: SourceUnit, fn: FunctionInfo, var: str, skip: set[int] = frozenset()
) -> list[Use]:
    """Every occurrence of ``var`` in the body of ``fn``, classified.

    Token indices in ``skip`` are ignored (alias declarations and the like).
    """
    toks = unit.tokens
    pairs = _pairs(unit)
    args = call_arguments(unit, fn)
    lo, hi = fn.tok_range
    uses: list[Use] = []
    for k in range(lo + 1, hi):
        t = toks[k]
        if t.kind != "ident" or t.text != var or k in skip:
            continue
        prev = toks[k - 1]
        if prev.kind == "punct" and prev.text in (".", "->"):
            continue
        j = k + 1
        chain: list[str] = []
        while (
            j + 1 < hi and toks[j].kind == "punct" and toks[j].text in ("->", ".")
            and toks[j + 1].kind == "ident"
        ):
            chain.append(toks[j + 1].text)
            j += 2
        end_char = toks[j - 1].end
        nxt = toks[j]
        # sizeof x->a.b  |  sizeof(x->a.b)
        if prev.kind == "ident" and prev.text == "sizeof":
            uses.append(Use(prev.start, end_char, tuple(chain), "sizeof", first_tok=k - 1, next_tok=j))
            continue
        if (
            _is(prev, "(") and _is(nxt, ")") and pairs.get(k - 1) == j
            and toks[k - 2].kind == "ident" and toks[k - 2].text == "sizeof"
        ):
            uses.append(Use(toks[k - 2].start, nxt.end, tuple(chain), "sizeof", first_tok=k - 2, next_tok=j + 1))
            continue
        addr = _is(prev, "&") and not _is(nxt, "[")
        first = k - 1 if addr else k
        arg = args.get(first)
        if arg is not None and arg[2] == j:
            uses.append(Use(toks[first].start, end_char, tuple(chain), "arg",
                            callee=arg[0], arg_index=arg[1], write=addr, first_tok=first, next_tok=j))
            continue
        if addr:
            uses.append(Use(prev.start, end_char, tuple(chain), "addr", write=True, first_tok=k - 1, next_tok=j))
            continue
        uses.append(Use(t.start, end_char, tuple(chain), "access", write=is_write(toks, pairs, k),
                        first_tok=k, next_tok=j))
    return uses
