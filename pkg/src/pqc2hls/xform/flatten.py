"""Aggregate-interface flattening.

The top function gets a ``<top>_hls`` twin whose parameters are the
primitive leaves of its aggregates, every callee that receives an
aggregate gets a ``<name>_no_structs`` twin, and the original top becomes
a wrapper that unpacks its aggregate and delegates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..csrc.aggregates import Leaf, Use, find_uses, struct_leaves
from ..csrc.ctypes import TypeEnv
from ..csrc.model import FunctionInfo, ParamInfo, SourceUnit, Span, StructDef
from ..errors import FlattenError, UnboundedField, UnknownFunction
from ._text import removal, signature_text
from .patch import DeterministicRule, Patch, Replacement, splice

RULE = DeterministicRule("flatten_aggregates")
HLS_SUFFIX = "_hls"
CALLEE_SUFFIX = "_no_structs"


@dataclass
class _Agg:
    """One aggregate flowing into a function through a parameter."""

    param: ParamInfo
    var: str  # name used in the body (an alias for opaque pointers)
    type_name: str
    struct: StructDef
    leaves: list[Leaf]
    prefix: str
    skip: set[int] = field(default_factory=set)
    removals: list[tuple[Span, str]] = field(default_factory=list)
    need: dict[tuple[str, ...], bool] = field(default_factory=dict)  # leaf chain -> by reference

    def name(self, leaf: Leaf) -> str:
        return f"{self.prefix}_{leaf.name}" if self.prefix else leaf.name

    def leaf(self, chain: tuple[str, ...]) -> Leaf | None:
        for lf in self.leaves:
            if lf.chain == chain:
                return lf
        return None

    def used_leaves(self) -> list[Leaf]:
        return [lf for lf in self.leaves if lf.chain in self.need]

    def declaration(self, leaf: Leaf) -> str:
        return leaf.declaration(self.name(leaf), by_ref=self.need[leaf.chain])


class _Flattener:
    def __init__(self, unit: SourceUnit, top: str, depth_limit: int):
        self.unit = unit
        self.top = top
        self.env = TypeEnv(unit)
        self.depth_limit = depth_limit
        self.defined = set(unit.function_names)
        self.memo: dict[tuple[str, int], _Agg] = {}
        self.active: set[tuple[str, int]] = set()
        self.order: list[str] = []  # callees needing a twin, discovery order

    # -- analysis --------------------------------------------------------

    def struct_for(self, base: str, pointer_depth: int, what: str) -> tuple[StructDef, str] | None:
        r = self.env.resolve(base)
        if r.struct is None:
            return None
        if pointer_depth + r.pointer_depth != 1:
            raise FlattenError(f"{what} passes an aggregate by value or through double indirection")
        words = [w for w in base.split() if w not in ("const", "volatile", "restrict")]
        return r.struct, " ".join(words)

    def top_aggregates(self, f: FunctionInfo) -> list[_Agg]:
        aggs = []
        for p in f.params:
            if p.is_function_pointer:
                continue
            if p.is_void_pointer:
                agg = self.opaque_alias(f, p)
                if agg is not None:
                    aggs.append(agg)
                continue
            r = self.env.resolve(p.base)
            if r.struct is not None:
                if p.pointer_depth + r.pointer_depth != 1 or p.dims:
                    raise FlattenError(f"parameter {p.name} passes an aggregate by value")
                aggs.append(self.make_agg(p, p.name, r.struct, p.base, prefix=p.name))
        return aggs

    def make_agg(self, p: ParamInfo, var: str, struct: StructDef, type_name: str, prefix: str) -> _Agg:
        words = [w for w in type_name.split() if w not in ("const", "volatile", "restrict")]
        leaves = struct_leaves(self.env, struct, self.depth_limit)
        return _Agg(p, var, " ".join(words), struct, leaves, prefix)

    def opaque_alias(self, f: FunctionInfo, p: ParamInfo) -> _Agg | None:
        """Find ``T *x; x = ctx;`` or ``T *x = [(T *)]ctx;`` in the body."""
        unit, toks = self.unit, self.unit.tokens
        alias = None
        type_name = None
        skip: set[int] = set()
        removals: list[tuple[Span, str]] = []
        for st in f.statements:
            ts = toks[st.tok_start:st.tok_end]
            texts = [t.text for t in ts]
            if st.kind == "decl":
                # T * x ;  |  T * x = ctx ;  |  T * x = ( T * ) ctx ;
                if "*" not in texts:
                    continue
                star = texts.index("*")
                if star == 0 or star + 1 >= len(texts) or ts[star + 1].kind != "ident":
                    continue
                base = " ".join(texts[:star])
                r = self.env.resolve(base)
                if r.struct is None:
                    continue
                rest = texts[star + 2:]
                init_ok = rest in ([";"], ["=", p.name, ";"]) or (
                    len(rest) >= 6 and rest[0] == "=" and rest[1] == "(" and rest[-2:] == [p.name, ";"]
                    and rest[-3] == ")"
                )
                if not init_ok:
                    continue
                if rest == [";"]:
                    # must be assigned from the context pointer later
                    cand = texts[star + 1]
                    assigned = any(
                        [t.text for t in toks[s2.tok_start:s2.tok_end]] in ([cand, "=", p.name, ";"],)
                        for s2 in f.statements
                    )
                    if not assigned:
                        continue
                alias = texts[star + 1]
                type_name = base
                skip.update(range(st.tok_start, st.tok_end))
                removals.append(removal(unit.text, st.span, st.parent_control))
            elif alias is not None and texts == [alias, "=", p.name, ";"]:
                skip.update(range(st.tok_start, st.tok_end))
                removals.append(removal(unit.text, st.span, st.parent_control))
        if alias is None:
            return None
        struct = self.env.resolve(type_name).struct
        agg = self.make_agg(p, alias, struct, type_name, prefix="")
        agg.skip = skip
        agg.removals = removals
        # the context pointer itself must not be used elsewhere
        lo, hi = f.tok_range
        for k in range(lo + 1, hi):
            if toks[k].kind == "ident" and toks[k].text == p.name and k not in skip:
                raise FlattenError(f"opaque pointer {p.name} is used beyond its alias")
        return agg

    def callee_agg(self, callee: str, index: int) -> _Agg:
        key = (callee, index)
        if key in self.memo:
            return self.memo[key]
        if key in self.active:
            raise FlattenError(f"recursive aggregate flow through {callee}")
        g = self.unit.function(callee)
        if index >= len(g.params):
            raise FlattenError(f"call to {callee} has more arguments than parameters")
        p = g.params[index]
        found = self.struct_for(p.base, p.pointer_depth, f"parameter {p.name} of {callee}")
        if found is None:
            raise FlattenError(f"{callee} receives an aggregate through non-aggregate parameter {p.name}")
        struct, type_name = found
        agg = self.make_agg(p, p.name, struct, type_name, prefix=p.name)
        self.active.add(key)
        self.analyze(g, agg)
        self.active.discard(key)
        self.memo[key] = agg
        if callee not in self.order:
            self.order.append(callee)
        return agg

    def analyze(self, f: FunctionInfo, agg: _Agg) -> None:
        for u in find_uses(self.unit, f, agg.var, agg.skip):
            if u.kind == "sizeof":
                continue
            leaf = agg.leaf(u.chain)
            if leaf is not None:
                self.mark(agg, leaf, u.write)
                continue
            sub = self.sub_chain(agg, u.chain)
            if u.kind == "arg" and u.callee in self.defined:
                if u.chain and not u.write:
                    raise FlattenError(f"{f.name} passes {agg.var}->{'.'.join(u.chain)} by value")
                inner = self.callee_agg(u.callee, u.arg_index)
                for lf in inner.used_leaves():
                    outer = agg.leaf(sub + lf.chain)
                    if outer is None:
                        raise FlattenError(f"{u.callee} expects a different aggregate from {f.name}")
                    self.mark(agg, outer, inner.need[lf.chain])
                continue
            what = ".".join(u.chain) or agg.var
            raise FlattenError(f"{f.name} uses {what} in a way that cannot be unpacked")

    def sub_chain(self, agg: _Agg, chain: tuple[str, ...]) -> tuple[str, ...]:
        if not chain:
            return ()
        if any(lf.chain[:len(chain)] == chain for lf in agg.leaves):
            return chain
        raise FlattenError(f"unknown member chain {'.'.join(chain)} of {agg.type_name}")

    def mark(self, agg: _Agg, leaf: Leaf, by_ref: bool) -> None:
        if leaf.pointer_depth or any(not d for d in leaf.dims):
            raise UnboundedField(agg.name(leaf))
        if leaf.dims:
            by_ref = False  # arrays are passed by pointer anyway
        agg.need[leaf.chain] = agg.need.get(leaf.chain, False) or by_ref

    # -- rewriting ---------------------------------------------------------

    def arg_expr(self, outer: _Agg, outer_leaf: Leaf, want_ref: bool) -> str:
        name = outer.name(outer_leaf)
        have_ref = outer.need[outer_leaf.chain]
        if outer_leaf.dims or have_ref == want_ref:
            return name
        if have_ref and not want_ref:
            return f"{name}[0]"
        raise FlattenError(f"{name} is needed by reference but held by value")

    def leaf_expr(self, agg: _Agg, leaf: Leaf, u: Use) -> str:
        name = agg.name(leaf)
        ref = agg.need.get(leaf.chain, False)
        if leaf.dims:
            return ("&" if u.kind == "addr" or (u.kind == "arg" and u.write) else "") + name
        if u.kind == "addr" or (u.kind == "arg" and u.write):
            return name
        return f"{name}[0]" if ref else name

    def rewrite_body(self, f: FunctionInfo, aggs: list[_Agg], twins: dict[str, str]) -> str:
        unit, toks = self.unit, self.unit.tokens
        reps: list[tuple[Span, str]] = []
        for agg in aggs:
            reps.extend(agg.removals)
            for u in find_uses(unit, f, agg.var, agg.skip):
                leaf = agg.leaf(u.chain)
                if u.kind == "sizeof":
                    if leaf is None:
                        raise FlattenError(f"sizeof of aggregate {agg.var} in {f.name}")
                    reps.append((Span(u.start, u.end), f"sizeof({leaf.type_text()})"))
                    continue
                if leaf is not None:
                    reps.append((Span(u.start, u.end), self.leaf_expr(agg, leaf, u)))
                    continue
                # aggregate argument to a flattened callee
                inner = self.callee_agg(u.callee, u.arg_index)
                sub = self.sub_chain(agg, u.chain)
                parts = [
                    self.arg_expr(agg, agg.leaf(sub + lf.chain), inner.need[lf.chain])
                    for lf in inner.used_leaves()
                ]
                span = Span(u.start, u.end)
                if not parts:
                    nxt = toks[u.next_tok]
                    if nxt.text == ",":
                        span = Span(u.start, toks[u.next_tok + 1].start)
                    elif toks[u.first_tok - 1].text == ",":
                        span = Span(toks[u.first_tok - 2].end, u.end)
                reps.append((span, ", ".join(parts)))
        for c in f.calls:
            if c.callee in twins:
                t = toks[c.name_tok]
                reps.append((Span(t.start, t.end), twins[c.callee]))
        lo, hi = f.body_span
        reps.sort(key=lambda r: (r[0].start, r[0].end))
        rel = [Replacement(Span(s.start - lo, s.end - lo), text) for s, text in reps]
        for a, b in zip(rel, rel[1:]):
            if b.span.start < a.span.end:
                raise FlattenError(f"overlapping rewrites in {f.name}")
        return splice(unit.text[lo:hi], rel)

    def check_names(self, f: FunctionInfo, names: list[str]) -> None:
        taken = set(f.locals) | {p.name for p in f.params}
        for n in names:
            if n in taken or n in self.defined:
                raise FlattenError(f"unpacked name {n} clashes in {f.name}")
        if len(set(names)) != len(names):
            raise FlattenError(f"duplicate unpacked names in {f.name}")

    def callee_aggs(self, g: FunctionInfo) -> dict[int, _Agg]:
        return {i: a for (name, i), a in self.memo.items() if name == g.name}

    def run(self) -> Patch:
        unit = self.unit
        f = unit.function(self.top)
        if f is None:
            raise UnknownFunction(self.top)
        hls = self.top + HLS_SUFFIX
        if unit.function(hls) is not None:
            return Patch.empty(RULE, f"{hls} already present")
        aggs = self.top_aggregates(f)
        if not aggs:
            return Patch.empty(RULE, "nothing to flatten")
        for agg in aggs:
            self.analyze(f, agg)
        twins = {name: name + CALLEE_SUFFIX for name in self.order}
        for name in twins.values():
            if name in self.defined:
                raise FlattenError(f"{name} already exists")

        text = unit.text
        reps: list[tuple[Span, str]] = []
        protos: list[str] = []

        # top twin: plain params first, then the unpacked leaves
        agg_params = {a.param.name for a in aggs}
        plain = [text[p.span.start:p.span.end] for p in f.params if p.name not in agg_params]
        leaf_decls = [a.declaration(lf) for a in aggs for lf in a.used_leaves()]
        self.check_names(f, [a.name(lf) for a in aggs for lf in a.used_leaves()])
        sig = signature_text(unit, f, hls, ", ".join(plain + leaf_decls) or "void")
        body = self.rewrite_body(f, aggs, twins)
        protos.append(sig + ";")

        # wrapper keeps the original signature
        lines = []
        call_args = [p.name for p in f.params if p.name not in agg_params]
        for a in aggs:
            if a.prefix == "":
                lines.append(f"    {a.type_name} *{a.var} = ({a.type_name} *){a.param.name};")
            for lf in a.used_leaves():
                access = f"{a.var}->{'.'.join(lf.chain)}"
                call_args.append(f"&{access}" if a.need[lf.chain] else access)
        call = f"{hls}({', '.join(call_args)})"
        lines.append(f"    {call};" if f.returns_void else f"    return {call};")
        wrapper = "{\n" + "\n".join(lines) + "\n}"
        reps.append((Span(f.span.start, f.span.start), f"{sig}\n{body}\n\n"))
        reps.append((f.body_span, wrapper))

        firsts = [f.span.start]
        for name in self.order:
            g = unit.function(name)
            gaggs = self.callee_aggs(g)
            firsts.append(g.span.start)
            params = []
            names = []
            for i, p in enumerate(g.params):
                if i in gaggs:
                    params.extend(gaggs[i].declaration(lf) for lf in gaggs[i].used_leaves())
                    names.extend(gaggs[i].name(lf) for lf in gaggs[i].used_leaves())
                else:
                    params.append(text[p.span.start:p.span.end])
            self.check_names(g, names)
            gsig = signature_text(unit, g, twins[name], ", ".join(params) or "void")
            gbody = self.rewrite_body(g, list(gaggs.values()), twins)
            protos.append(gsig + ";")
            reps.append((Span(g.span.end, g.span.end), f"\n\n{gsig}\n{gbody}"))

        at = min(firsts)
        # prototypes first so the merged insertion precedes any definition
        reps.insert(0, (Span(at, at), "\n".join(protos) + "\n\n"))
        return Patch.build(reps, RULE, f"flatten aggregate interface of {self.top}")


def flatten_aggregates(unit: SourceUnit, top_fn: str, depth_limit: int = 4) -> Patch:
    return _Flattener(unit, top_fn, depth_limit).run()
