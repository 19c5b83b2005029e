"""Static memory mapping: malloc'd buffers become static arrays, frees vanish."""

from __future__ import annotations

from ..csrc.ctypes import TypeEnv
from ..csrc.lexer import QUALIFIERS, STORAGE, int_value
from ..csrc.model import FunctionInfo, SourceUnit, Span, StmtInfo
from ..errors import NotStaticallySizable
from ._text import (
    definition_removal,
    fresh_name,
    header_insertion_point,
    is_call_statement,
    removal,
)
from .patch import DeterministicRule, Patch

RULE = DeterministicRule("map_static_memory")
ALLOCATORS = ("malloc", "calloc", "realloc")


def _norm(words: list[str]) -> str:
    return " ".join(w for w in words if w not in QUALIFIERS and w not in STORAGE)


class _Sizer:
    def __init__(self, unit: SourceUnit):
        self.unit = unit
        self.env = TypeEnv(unit)
        self.macros = {m.name: m.body for m in unit.macros if not m.function_like}

    def literal(self, text: str) -> int | None:
        text = text.strip()
        while text.startswith("(") and text.endswith(")"):
            text = text[1:-1].strip()
        v = int_value(text)
        if v is not None:
            return v
        if text in self.macros:
            return self.literal(self.macros[text])
        return None

    def type_size(self, type_text: str) -> int | None:
        words = type_text.replace("*", " * ").split()
        ptr = words.count("*")
        if ptr:
            return 8
        r = self.env.resolve(" ".join(words))
        if r.pointer_depth:
            return 8
        if r.scalar is not None:
            return r.scalar.size
        return None

    def factors(self, toks, a: int, b: int) -> list[tuple[str, str]] | None:
        """Split tokens a..b on top-level '*' into ('lit', text) / ('sizeof', type)."""
        out = []
        pairs = self.unit.pairs
        i = a
        start = a
        items = []
        while i < b:
            t = toks[i]
            if t.kind == "punct" and t.text in "([{":
                i = pairs[i] + 1
                continue
            if t.kind == "punct" and t.text == "*":
                items.append((start, i))
                start = i + 1
            i += 1
        items.append((start, b))
        for x, y in items:
            if y <= x:
                return None
            if toks[x].text == "sizeof":
                if toks[x + 1].text == "(" and pairs.get(x + 1) == y - 1:
                    out.append(("sizeof", " ".join(t.text for t in toks[x + 2:y - 1])))
                else:
                    return None
            else:
                out.append(("lit", self.unit.text[toks[x].start:toks[y - 1].end]))
        return out

    def elements(self, toks, a: int, b: int, elem_type: str) -> int | None:
        facs = self.factors(toks, a, b)
        if facs is None:
            return None
        count = 1
        size_terms = []
        for kind, text in facs:
            if kind == "lit":
                v = self.literal(text)
                if v is None:
                    return None
                count *= v
            else:
                size_terms.append(text)
        elem = self.type_size(elem_type)
        if not size_terms:
            # plain byte count
            if elem is None or count % elem:
                return None
            return count // elem
        if len(size_terms) != 1:
            return None
        term = size_terms[0]
        if _norm(term.split()) == _norm(elem_type.split()):
            return count
        tsize = self.type_size(term)
        if tsize is None or elem is None or (count * tsize) % elem:
            return None
        return count * tsize // elem


def _alloc_call(unit: SourceUnit, st: StmtInfo) -> tuple[int, str] | None:
    """Index of the allocator name token inside a statement, if any."""
    toks = unit.tokens
    for i in range(st.tok_start, st.tok_end - 1):
        t = toks[i]
        if t.kind == "ident" and t.text in ALLOCATORS and toks[i + 1].text == "(":
            prev = toks[i - 1]
            if prev.kind == "punct" and prev.text in (".", "->"):
                continue
            return i, t.text
    return None


def _decl_target(unit: SourceUnit, st: StmtInfo, alloc_idx: int):
    """For ``T *p = [cast] malloc(..);`` return (T, p)."""
    toks = unit.tokens
    i = st.tok_start
    eq = None
    for k in range(i, alloc_idx):
        if toks[k].text == "=":
            eq = k
            break
    if eq is None or toks[eq - 1].kind != "ident":
        return None
    name = toks[eq - 1].text
    k = eq - 2
    stars = 0
    while k >= i and toks[k].text == "*":
        stars += 1
        k -= 1
    if stars != 1 or k < i:
        return None
    base = " ".join(t.text for t in toks[i:k + 1])
    if any(t.text == "," for t in toks[i:eq]):
        return None
    return base, name


def _local_pointer_type(unit: SourceUnit, f: FunctionInfo, name: str) -> str | None:
    toks = unit.tokens
    for st in f.statements:
        if st.kind != "decl":
            continue
        for k in range(st.tok_start, st.tok_end - 1):
            t = toks[k]
            if t.kind == "ident" and t.text == name and toks[k - 1].text == "*" and toks[k - 2].text != "*":
                j = k - 2
                while j >= st.tok_start and toks[j].kind == "ident" and toks[j].text not in (name,):
                    j -= 1
                base_toks = [x.text for x in toks[j + 1:k - 1]]
                if base_toks:
                    return " ".join(base_toks)
    return None


def split_args(unit: SourceUnit, open_: int, close: int) -> list[tuple[int, int]]:
    toks, pairs = unit.tokens, unit.pairs
    out = []
    start = i = open_ + 1
    while i < close:
        t = toks[i]
        if t.kind == "punct" and t.text in "([{":
            i = pairs[i] + 1
            continue
        if t.kind == "punct" and t.text == ",":
            out.append((start, i))
            start = i + 1
        i += 1
    if start < close:
        out.append((start, close))
    return out


def free_only(unit: SourceUnit, f: FunctionInfo) -> bool:
    if not f.returns_void or f.loops or not f.statements:
        return False
    return all(is_call_statement(unit, st, "free") for st in f.statements)


def map_static_memory(unit: SourceUnit) -> Patch:
    sizer = _Sizer(unit)
    text = unit.text
    toks = unit.tokens
    reps: list[tuple[Span, str]] = []
    taken: set[str] = set()
    need_string_h = False
    doomed = [f for f in unit.functions if free_only(unit, f)]
    doomed_names = {f.name for f in doomed}

    for f in doomed:
        reps.append(definition_removal(text, f.span))
    for p in unit.prototypes:
        if p.name in doomed_names:
            reps.append(definition_removal(text, p.span))

    for f in unit.functions:
        if f.name in doomed_names:
            continue
        body_open = toks[f.tok_range[0]]
        prelude: list[str] = []
        for st in f.statements:
            if is_call_statement(unit, st, "free"):
                reps.append(removal(text, st.span, st.parent_control))
                continue
            if any(is_call_statement(unit, st, d) for d in doomed_names):
                reps.append(removal(text, st.span, st.parent_control))
                continue
            found = _alloc_call(unit, st)
            if found is None:
                continue
            idx, allocator = found
            span = (st.span.start, st.span.end)
            if allocator == "realloc":
                raise NotStaticallySizable(span, "realloc")
            target = _decl_target(unit, st, idx) if st.kind == "decl" else None
            assign = None
            if target is None and st.kind == "expr":
                a = st.tok_start
                if toks[a].kind == "ident" and toks[a + 1].text == "=":
                    base = _local_pointer_type(unit, f, toks[a].text)
                    if base is not None:
                        assign = (base, toks[a].text)
            if target is None and assign is None:
                raise NotStaticallySizable(span, unit.slice_text(st.span))
            base, name = target or assign
            elem_type = " ".join(w for w in base.split() if w not in STORAGE)
            open_ = idx + 1
            close = unit.pairs[open_]
            if close + 1 != st.tok_end - 1:
                raise NotStaticallySizable(span, unit.slice_text(st.span))
            if allocator == "malloc":
                k = sizer.elements(toks, open_ + 1, close, elem_type)
            else:
                args = split_args(unit, open_, close)
                if len(args) != 2:
                    raise NotStaticallySizable(span, unit.slice_text(st.span))
                (na, nb), (sa, sb) = args
                n = sizer.literal(text[toks[na].start:toks[nb - 1].end])
                per = sizer.elements(toks, sa, sb, elem_type)
                k = None if n is None or per is None else n * per
            if k is None or k <= 0:
                raise NotStaticallySizable(span, text[toks[open_].start:toks[close].end])
            buf = fresh_name(unit, f"{name}_buf", taken)
            taken.add(buf)
            zero = f" memset({buf}, 0, sizeof {buf});" if allocator == "calloc" else ""
            need_string_h |= allocator == "calloc"
            plain_type = " ".join(w for w in elem_type.split() if w != "const") or elem_type
            if target is not None:
                new = f"static {plain_type} {buf}[{k}]; {base} *{name} = {buf};{zero}"
                reps.append((st.span, new))
            else:
                prelude.append(f"static {plain_type} {buf}[{k}];")
                reps.append((st.span, f"{name} = {buf};{zero}"))
        if prelude:
            reps.append((Span(body_open.end, body_open.end), "\n    " + "\n    ".join(prelude)))

    if need_string_h and not any(i.name == "string.h" for i in unit.includes):
        pos = header_insertion_point(unit)
        reps.append((Span(pos, pos), "#include <string.h>\n"))
    if not reps:
        return Patch.empty(RULE, "no dynamic memory")
    return Patch.build(reps, RULE, "map dynamic allocations to static buffers")
