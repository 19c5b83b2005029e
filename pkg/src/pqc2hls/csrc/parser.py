"""Structural parser for amalgamated C translation units.

This is deliberately not a grammar: it tokenizes, pairs brackets, and uses
declaration heuristics to find functions, globals, types, loops and call
sites. Everything it records is a span into the original text, so the text
itself is never rebuilt.
"""

from __future__ import annotations

import re

from ..errors import UnsupportedConstruct
from .lexer import (
    KEYWORDS,
    QUALIFIERS,
    STORAGE,
    TYPE_KEYWORDS,
    Token,
    int_value,
    match_brackets,
    tokenize,
)
from .model import (
    CallEdge,
    CallSite,
    FieldDecl,
    FunctionInfo,
    GlobalInfo,
    Include,
    LoopInfo,
    Macro,
    ParamInfo,
    Prototype,
    SourceUnit,
    Span,
    StmtInfo,
    StructDef,
    TypeDecl,
)

# Typedef names a translation unit may use without defining them itself.
KNOWN_TYPEDEFS = frozenset("""
size_t ssize_t ptrdiff_t intptr_t uintptr_t intmax_t uintmax_t bool FILE
int8_t int16_t int32_t int64_t uint8_t uint16_t uint32_t uint64_t
int_least8_t int_least16_t int_least32_t int_least64_t
uint_least8_t uint_least16_t uint_least32_t uint_least64_t
int_fast8_t int_fast16_t int_fast32_t int_fast64_t
uint_fast8_t uint_fast16_t uint_fast32_t uint_fast64_t
""".split())

ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<= >>=".split())
_INCLUDE_RE = re.compile(r'#\s*include\s*([<"])([^>"]+)[>"]')
_DEFINE_RE = re.compile(r"#\s*define\s+([A-Za-z_]\w*)(\()?")
_ATTRIBUTES = frozenset({"__attribute__", "__declspec", "__asm__", "asm"})


def _is(t: Token | None, text: str) -> bool:
    return t is not None and t.kind == "punct" and t.text == text


class _Decl:
    """Result of parsing one declarator."""

    __slots__ = ("name", "name_idx", "ptr", "dims", "params", "fnptr", "end")

    def __init__(self):
        self.name: str | None = None
        self.name_idx: int | None = None
        self.ptr = 0
        self.dims: list[str] = []
        self.params: tuple[int, int] | None = None  # '(' and ')' indices
        self.fnptr = False
        self.end = 0


class _Specs:
    __slots__ = ("end", "base", "storage", "kind", "tag", "struct", "enumerators", "saw_type")

    def __init__(self):
        self.end = 0
        self.base = ""
        self.storage: set[str] = set()
        self.kind: str | None = None
        self.tag: str | None = None
        self.struct: StructDef | None = None
        self.enumerators: tuple[str, ...] = ()
        self.saw_type = False


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.pairs = match_brackets(self.toks)
        self.typedefs: set[str] = set(KNOWN_TYPEDEFS)
        self.typedef_struct: dict[str, StructDef] = {}
        self.tag_struct: dict[str, StructDef] = {}
        self.typedef_target: dict[str, tuple[str, int]] = {}

    # -- helpers ----------------------------------------------------------

    def tok(self, i: int) -> Token | None:
        return self.toks[i] if 0 <= i < len(self.toks) else None

    def span(self, i: int, j: int) -> Span:
        """Span from token i through token j inclusive."""
        return Span(self.toks[i].start, self.toks[j].end)

    def skip_attribute(self, i: int) -> int:
        nxt = self.tok(i + 1)
        if _is(nxt, "("):
            return self.pairs[i + 1] + 1
        return i + 1

    def is_type_start(self, i: int, end: int) -> bool:
        t = self.tok(i)
        if t is None or i >= end or t.kind != "ident":
            return False
        if t.text in STORAGE or t.text in QUALIFIERS or t.text in TYPE_KEYWORDS:
            return True
        if t.text in ("struct", "union", "enum"):
            return True
        if t.text in self.typedefs:
            nxt = self.tok(i + 1)
            return nxt is not None and (nxt.kind == "ident" or _is(nxt, "*")) and i + 1 < end
        return False

    # -- declarations ----------------------------------------------------

    def specifiers(self, i: int, end: int) -> _Specs:
        s = _Specs()
        words: list[str] = []
        toks = self.toks
        while i < end:
            t = toks[i]
            if t.kind != "ident":
                break
            w = t.text
            if w in _ATTRIBUTES:
                i = self.skip_attribute(i)
                continue
            if w in STORAGE:
                s.storage.add(w)
                if w != "typedef":
                    words.append(w)
                i += 1
                continue
            if w in QUALIFIERS:
                words.append(w)
                i += 1
                continue
            if w in TYPE_KEYWORDS:
                s.saw_type = True
                words.append(w)
                i += 1
                continue
            if w in ("struct", "union", "enum"):
                s.kind = w
                s.saw_type = True
                i += 1
                t2 = self.tok(i)
                if t2 is not None and t2.kind == "ident" and t2.text not in KEYWORDS:
                    s.tag = t2.text
                    i += 1
                if _is(self.tok(i), "{"):
                    close = self.pairs[i]
                    if w == "enum":
                        s.enumerators = self.enumerators(i + 1, close)
                    else:
                        s.struct = StructDef(w, s.tag, self.struct_fields(i + 1, close))
                        if s.tag:
                            self.tag_struct[s.tag] = s.struct
                    i = close + 1
                words.append(f"{w} {s.tag}" if s.tag else w)
                continue
            if not s.saw_type and w not in KEYWORDS:
                nxt = self.tok(i + 1)
                if w in self.typedefs or (
                    nxt is not None and i + 1 < end and (nxt.kind == "ident" or _is(nxt, "*"))
                ):
                    s.saw_type = True
                    words.append(w)
                    i += 1
                    continue
            break
        s.end = i
        s.base = " ".join(words)
        return s

    def enumerators(self, i: int, end: int) -> tuple[str, ...]:
        names = []
        expect = True
        while i < end:
            t = self.toks[i]
            if expect and t.kind == "ident":
                names.append(t.text)
                expect = False
            elif _is(t, ","):
                expect = True
            elif t.kind == "punct" and t.text in "([{":
                i = self.pairs[i]
            i += 1
        return tuple(names)

    def declarator(self, i: int, end: int) -> _Decl:
        d = _Decl()
        toks = self.toks
        while i < end:
            t = toks[i]
            if _is(t, "*"):
                d.ptr += 1
                i += 1
            elif t.kind == "ident" and (t.text in QUALIFIERS or t.text in _ATTRIBUTES):
                i = self.skip_attribute(i) if t.text in _ATTRIBUTES else i + 1
            else:
                break
        t = self.tok(i)
        if _is(t, "(") and i < end:
            close = self.pairs[i]
            inner = self.declarator(i + 1, close)
            d.name, d.name_idx = inner.name, inner.name_idx
            d.dims = inner.dims
            if _is(self.tok(close + 1), "("):
                d.fnptr = inner.ptr > 0
                if not d.fnptr:
                    d.params = (close + 1, self.pairs[close + 1])
                    d.ptr += inner.ptr
                i = self.pairs[close + 1] + 1
            else:
                d.ptr += inner.ptr
                i = close + 1
        elif t is not None and i < end and t.kind == "ident" and t.text not in KEYWORDS:
            d.name, d.name_idx = t.text, i
            i += 1
        while i < end:
            t = toks[i]
            if _is(t, "["):
                close = self.pairs[i]
                d.dims.append(self.text[t.end:toks[close].start].strip())
                i = close + 1
            elif _is(t, "("):
                d.params = (i, self.pairs[i])
                i = self.pairs[i] + 1
            elif t.kind == "ident" and t.text in _ATTRIBUTES:
                i = self.skip_attribute(i)
            else:
                break
        d.end = i
        return d

    def split_commas(self, i: int, end: int) -> list[tuple[int, int]]:
        parts = []
        start = i
        while i < end:
            t = self.toks[i]
            if t.kind == "punct" and t.text in "([{":
                i = self.pairs[i] + 1
                continue
            if _is(t, ","):
                parts.append((start, i))
                start = i + 1
            i += 1
        if start < end:
            parts.append((start, end))
        return parts

    def skip_to_comma(self, i: int, end: int) -> int:
        while i < end:
            t = self.toks[i]
            if t.kind == "punct" and t.text in "([{":
                i = self.pairs[i] + 1
                continue
            if _is(t, ","):
                return i
            i += 1
        return end

    def struct_fields(self, i: int, end: int) -> tuple[FieldDecl, ...]:
        fields: list[FieldDecl] = []
        while i < end:
            if self.toks[i].kind == "pp" or _is(self.toks[i], ";"):
                i += 1
                continue
            s = self.specifiers(i, end)
            j = s.end
            stop = j
            while stop < end and not _is(self.toks[stop], ";"):
                t = self.toks[stop]
                stop = self.pairs[stop] + 1 if t.kind == "punct" and t.text in "([{" else stop + 1
            if j >= stop:
                # anonymous nested aggregate: flatten its members in place
                if s.struct is not None:
                    fields.extend(s.struct.fields)
            for a, b in self.split_commas(j, stop):
                d = self.declarator(a, b)
                if d.name is None:
                    continue
                fields.append(FieldDecl(d.name, s.base, d.ptr, tuple(d.dims), s.struct))
            i = stop + 1
        return tuple(fields)

    def resolve_struct(self, base: str) -> StructDef | None:
        words = [w for w in base.split() if w not in QUALIFIERS and w not in STORAGE]
        seen = set()
        while words:
            if len(words) == 2 and words[0] in ("struct", "union"):
                return self.tag_struct.get(words[1])
            if len(words) == 1 and words[0] in self.typedef_struct:
                return self.typedef_struct[words[0]]
            if len(words) == 1 and words[0] in self.typedef_target and words[0] not in seen:
                seen.add(words[0])
                target, ptr = self.typedef_target[words[0]]
                if ptr:
                    return None
                words = [w for w in target.split() if w not in QUALIFIERS]
                continue
            return None
        return None

    def param(self, a: int, b: int) -> ParamInfo | None:
        s = self.specifiers(a, b)
        d = self.declarator(s.end, b)
        if d.name is None:
            if s.base == "void" and d.ptr == 0:
                return None
            if s.base == "..." or _is(self.tok(a), "..."):
                return None
            raise UnsupportedConstruct(self.span(a, b - 1), "unnamed parameter in definition")
        struct = self.resolve_struct(s.base)
        words = [w for w in s.base.split() if w not in QUALIFIERS]
        return ParamInfo(
            name=d.name,
            base=s.base,
            pointer_depth=d.ptr,
            dims=tuple(d.dims),
            span=self.span(a, b - 1),
            is_aggregate=struct is not None and d.ptr <= 1 and not d.fnptr,
            is_void_pointer=words == ["void"] and d.ptr == 1,
            is_function_pointer=d.fnptr,
        )

    # -- top level -------------------------------------------------------

    def parse(self) -> SourceUnit:
        toks, pairs = self.toks, self.pairs
        includes: list[Include] = []
        macros: list[Macro] = []
        directives: list[Span] = []
        types: list[TypeDecl] = []
        globals_: list[GlobalInfo] = []
        protos: list[Prototype] = []
        fdefs: list[tuple[int, int, int]] = []  # chunk start, '{' index, '}' index

        i = 0
        chunk: int | None = None
        n = len(toks)
        while i < n:
            t = toks[i]
            if t.kind == "pp":
                self.directive(t, includes, macros, directives)
                i += 1
                continue
            if chunk is None:
                chunk = i
            if t.kind == "punct":
                if t.text == "{":
                    close = pairs[i]
                    if self.is_function_body(chunk, i):
                        fdefs.append((chunk, i, close))
                        chunk = None
                    i = close + 1
                    continue
                if t.text in "([":
                    i = pairs[i] + 1
                    continue
                if t.text == ";":
                    self.declaration(chunk, i, types, globals_, protos)
                    chunk = None
            i += 1
        if chunk is not None:
            raise UnsupportedConstruct(
                Span(toks[chunk].start, toks[-1].end), "unterminated top-level declaration"
            )

        global_names = {g.name for g in globals_}
        functions = [self.function(c, o, e, global_names) for c, o, e in fdefs]
        names = [f.name for f in functions]
        if len(set(names)) != len(names):
            dup = next(x for x in names if names.count(x) > 1)
            raise UnsupportedConstruct(None, f"function {dup} defined twice")
        edges = tuple(
            CallEdge(f.name, c.callee, c.span) for f in functions for c in f.calls
        )
        return SourceUnit(
            text=self.text,
            functions=tuple(functions),
            globals=tuple(globals_),
            includes=tuple(includes),
            call_edges=edges,
            types=tuple(types),
            prototypes=tuple(protos),
            macros=tuple(macros),
            directives=tuple(directives),
            tokens=tuple(toks),
            pairs=pairs,
        )

    def directive(self, t: Token, includes, macros, directives) -> None:
        span = Span(t.start, t.end)
        directives.append(span)
        m = _INCLUDE_RE.match(t.text)
        if m:
            includes.append(Include(m.group(2), span, m.group(1) == "<"))
            return
        m = _DEFINE_RE.match(t.text)
        if m:
            macros.append(Macro(m.group(1), span, m.group(2) is not None, t.text[m.end():].strip()))

    def prev_code(self, i: int, lo: int) -> int | None:
        j = i - 1
        while j >= lo and self.toks[j].kind == "pp":
            j -= 1
        return j if j >= lo else None

    def is_function_body(self, chunk: int, brace: int) -> bool:
        p = self.prev_code(brace, chunk)
        while p is not None and self.toks[p].kind == "ident" and self.toks[p].text in _ATTRIBUTES:
            p = self.prev_code(p, chunk)
        if p is None:
            return False
        t = self.toks[p]
        if _is(t, ")") and _is(self.tok(self.pairs[p] - 1), ")"):
            # __attribute__((...)) right before the body
            owner = self.tok(self.pairs[self.pairs[p] - 1] - 1)
            if owner is not None and owner.text in _ATTRIBUTES:
                p = self.pairs[self.pairs[p] - 1] - 2
                t = self.toks[p]
        if not _is(t, ")"):
            return False
        first = self.toks[chunk]
        if first.kind == "ident" and first.text == "typedef":
            return False
        for k in range(chunk, brace):
            if _is(self.toks[k], "="):
                return False
        return True

    def declaration(self, a: int, semi: int, types, globals_, protos) -> None:
        s = self.specifiers(a, semi)
        decl_span = self.span(a, semi)
        parts = self.split_commas(s.end, semi)
        if "typedef" in s.storage:
            names = []
            for x, y in parts:
                d = self.declarator(x, y)
                if d.name is None:
                    continue
                names.append(d.name)
                self.typedefs.add(d.name)
                if s.struct is not None and d.ptr == 0 and not d.dims:
                    self.typedef_struct[d.name] = s.struct
                elif s.struct is None and not d.dims and not d.fnptr:
                    target_struct = self.resolve_struct(s.base)
                    if target_struct is not None and d.ptr == 0:
                        self.typedef_struct[d.name] = target_struct
                    else:
                        self.typedef_target[d.name] = (s.base, d.ptr)
            types.append(TypeDecl(
                span=decl_span, names=tuple(names), tag=s.tag if (s.struct or s.enumerators) else None,
                kind="typedef", struct=s.struct, target=s.base,
                target_pointer=self.declarator(*parts[0]).ptr if parts else 0,
                enumerators=s.enumerators,
            ))
            return
        if s.struct is not None or s.enumerators or (s.kind and not parts):
            types.append(TypeDecl(
                span=decl_span, names=(), tag=s.tag, kind=s.kind or "struct",
                struct=s.struct, enumerators=s.enumerators,
            ))
        shared = len(parts) > 1
        for x, y in parts:
            d = self.declarator(x, y)
            if d.name is None:
                continue
            if d.params is not None and not d.fnptr:
                protos.append(Prototype(d.name, decl_span))
                continue
            has_init = _is(self.tok(d.end), "=")
            count = None
            if d.dims:
                vals = [int_value(x_) for x_ in d.dims]
                if all(v is not None for v in vals):
                    count = 1
                    for v in vals:
                        count *= v
            end_tok = self.skip_to_comma(d.end, y) - 1 if has_init else d.end - 1
            globals_.append(GlobalInfo(
                name=d.name,
                span=decl_span,
                is_array=bool(d.dims),
                element_count=count,
                is_const_qualified="const" in s.base.split() and d.ptr == 0,
                has_initializer=has_init,
                base=s.base,
                pointer_depth=d.ptr,
                dims=tuple(d.dims),
                declarator_span=self.span(x, max(end_tok, x)),
                shared=shared,
            ))

    # -- function bodies -------------------------------------------------

    def function(self, chunk: int, brace: int, close: int, global_names: set[str]) -> FunctionInfo:
        s = self.specifiers(chunk, brace)
        d = self.declarator(s.end, brace)
        if d.name is None or d.params is None:
            raise UnsupportedConstruct(self.span(chunk, brace), "cannot identify function declarator")
        po, pc = d.params
        params = []
        for a, b in self.split_commas(po + 1, pc):
            p = self.param(a, b)
            if p is not None:
                params.append(p)
        name_tok = self.toks[d.name_idx]
        prefix = self.text[self.toks[chunk].start:name_tok.start]
        walker = _BodyWalker(self, brace, close)
        walker.run()
        param_names = {p.name for p in params}
        shadow = param_names | walker.locals
        # calls through function-pointer parameters or locals are not edges
        calls = [c for c in walker.calls() if c.callee not in shadow]
        reads, writes = self.global_uses(brace, close, global_names - shadow)
        return FunctionInfo(
            name=d.name,
            span=self.span(chunk, close),
            signature_span=self.span(chunk, pc),
            body_span=self.span(brace, close),
            params=tuple(params),
            loops=tuple(walker.loops),
            writes_globals=tuple(writes),
            reads_globals=tuple(reads),
            calls=tuple(calls),
            statements=tuple(walker.stmts),
            locals=tuple(sorted(walker.locals)),
            prefix=prefix,
            name_span=Span(name_tok.start, name_tok.end),
            params_span=Span(self.toks[po].end, self.toks[pc].start),
            tok_range=(brace, close),
        )

    def global_uses(self, lo: int, hi: int, names: set[str]) -> tuple[list[str], list[str]]:
        reads: list[str] = []
        writes: list[str] = []
        toks = self.toks
        for k in range(lo + 1, hi):
            t = toks[k]
            if t.kind != "ident" or t.text not in names:
                continue
            prev = toks[k - 1]
            if prev.kind == "punct" and prev.text in (".", "->"):
                continue
            if is_write(toks, self.pairs, k):
                if t.text not in writes:
                    writes.append(t.text)
            elif t.text not in reads:
                reads.append(t.text)
        return reads, writes


_MEM_WRITERS = frozenset({"memcpy", "memset", "memmove"})


def access_end(toks, pairs, k: int) -> int:
    """Index just after ident k and any trailing [..], .x, ->x chain."""
    j = k + 1
    n = len(toks)
    while j < n:
        t = toks[j]
        if _is(t, "["):
            j = pairs[j] + 1
        elif t.kind == "punct" and t.text in (".", "->") and j + 1 < n and toks[j + 1].kind == "ident":
            j += 2
        else:
            break
    return j


def is_write(toks, pairs, k: int) -> bool:
    prev = toks[k - 1] if k > 0 else None
    if prev is not None and prev.kind == "punct" and prev.text in ("++", "--"):
        return True
    j = access_end(toks, pairs, k)
    if j < len(toks):
        nxt = toks[j]
        if nxt.kind == "punct" and (nxt.text in ASSIGN_OPS or nxt.text in ("++", "--")):
            return True
    # first argument of memcpy/memset/memmove, optionally behind '&'
    a = k - 1
    if a >= 0 and _is(toks[a], "&"):
        a -= 1
    if a >= 1 and _is(toks[a], "(") and toks[a - 1].kind == "ident" and toks[a - 1].text in _MEM_WRITERS:
        return True
    return False


class _BodyWalker:
    def __init__(self, p: _Parser, brace: int, close: int):
        self.p = p
        self.toks = p.toks
        self.pairs = p.pairs
        self.brace = brace
        self.close = close
        self.loops: list[LoopInfo] = []
        self.loop_ranges: list[tuple[int, int]] = []
        self.stmts: list[StmtInfo] = []
        self.locals: set[str] = set()
        self.depth = 0

    def run(self) -> None:
        self.block(self.brace + 1, self.close)
        # fill body statement counts
        final = []
        for lp, (a, b) in zip(self.loops, self.loop_ranges):
            count = sum(1 for s in self.stmts if a <= s.tok_start and s.tok_end <= b + 1)
            final.append(LoopInfo(**{**lp.__dict__, "body_statements": count}))
        self.loops = final

    def block(self, i: int, close: int) -> None:
        while i < close:
            i = self.statement(i, sole=False)

    def statement(self, i: int, sole: bool) -> int:
        toks = self.toks
        t = toks[i]
        if t.kind == "pp":
            return i + 1
        if t.kind == "punct":
            if t.text == "{":
                self.block(i + 1, self.pairs[i])
                return self.pairs[i] + 1
            if t.text == ";":
                return i + 1
        if t.kind == "ident":
            w = t.text
            if w == "if":
                j = self.statement(self.pairs[i + 1] + 1, sole=True)
                if j < len(toks) and toks[j].kind == "ident" and toks[j].text == "else":
                    j = self.statement(j + 1, sole=True)
                return j
            if w == "switch":
                return self.statement(self.pairs[i + 1] + 1, sole=True)
            if w in ("for", "while"):
                return self.loop(i, w)
            if w == "do":
                return self.do_loop(i)
            if w in ("case", "default"):
                j = i + 1
                while not _is(toks[j], ":"):
                    j = self.pairs[j] + 1 if toks[j].kind == "punct" and toks[j].text in "([{" else j + 1
                return j + 1
            if w not in KEYWORDS and _is(self.p.tok(i + 1), ":"):
                return i + 2
        return self.simple(i, sole)

    def simple(self, i: int, sole: bool) -> int:
        toks = self.toks
        j = i
        while not _is(toks[j], ";"):
            if j >= self.close:
                raise UnsupportedConstruct(self.p.span(i, self.close), "statement without ';'")
            t = toks[j]
            j = self.pairs[j] + 1 if t.kind == "punct" and t.text in "([{" else j + 1
        first = toks[i]
        if first.kind == "ident" and first.text == "return":
            kind = "return"
        elif first.kind == "ident" and first.text in ("break", "continue", "goto"):
            kind = "jump"
        elif self.p.is_type_start(i, j):
            kind = "decl"
            self.declare(i, j)
        else:
            kind = "expr"
        self.stmts.append(StmtInfo(kind, self.p.span(i, j), i, j + 1, self.depth, sole))
        return j + 1

    def declare(self, i: int, j: int) -> None:
        s = self.p.specifiers(i, j)
        if "typedef" in s.storage:
            return
        for a, b in self.p.split_commas(s.end, j):
            d = self.p.declarator(a, b)
            if d.name:
                self.locals.add(d.name)

    def loop(self, i: int, kind: str) -> int:
        toks = self.toks
        po = i + 1
        pc = self.pairs[po]
        slot = len(self.loops)
        self.loops.append(None)  # type: ignore[arg-type]
        self.loop_ranges.append((0, 0))
        trip, var = (None, None)
        if kind == "for":
            parts = self.header_parts(po + 1, pc)
            if parts and self.p.is_type_start(parts[0][0], parts[0][1]):
                self.declare(parts[0][0], parts[0][1])
            trip, var = self.trip_count(parts)
        self.depth += 1
        j = self.statement(pc + 1, sole=True)
        self.depth -= 1
        if var is not None and trip is not None and self.modifies(var, pc + 1, j):
            trip = None
        body_first = pc + 1
        self.loops[slot] = LoopInfo(
            span=self.p.span(i, j - 1),
            trip_count=trip,
            nesting_depth=self.depth,
            kind=kind,
            index=slot,
            header_span=self.p.span(i, pc),
            body_span=self.p.span(body_first, j - 1),
            var=var,
        )
        self.loop_ranges[slot] = (body_first, j - 1)
        return j

    def do_loop(self, i: int) -> int:
        slot = len(self.loops)
        self.loops.append(None)  # type: ignore[arg-type]
        self.loop_ranges.append((0, 0))
        self.depth += 1
        j = self.statement(i + 1, sole=True)
        self.depth -= 1
        body_end = j - 1
        if not (self.toks[j].kind == "ident" and self.toks[j].text == "while"):
            raise UnsupportedConstruct(self.p.span(i, j), "do without while")
        pc = self.pairs[j + 1]
        end = pc + 1
        if not _is(self.toks[end], ";"):
            raise UnsupportedConstruct(self.p.span(i, end), "do-while without ';'")
        self.loops[slot] = LoopInfo(
            span=self.p.span(i, end), trip_count=None, nesting_depth=self.depth, kind="do",
            index=slot, header_span=self.p.span(i, i), body_span=self.p.span(i + 1, body_end),
        )
        self.loop_ranges[slot] = (i + 1, body_end)
        return end + 1

    def header_parts(self, a: int, b: int) -> list[tuple[int, int]]:
        parts = []
        start = a
        i = a
        while i < b:
            t = self.toks[i]
            if t.kind == "punct" and t.text in "([{":
                i = self.pairs[i] + 1
                continue
            if _is(t, ";"):
                parts.append((start, i))
                start = i + 1
            i += 1
        parts.append((start, b))
        return parts if len(parts) == 3 else []

    def _literal(self, a: int, b: int) -> int | None:
        toks = self.toks[a:b]
        if len(toks) == 1 and toks[0].kind == "number":
            return int_value(toks[0].text)
        if len(toks) == 2 and _is(toks[0], "-") and toks[1].kind == "number":
            v = int_value(toks[1].text)
            return -v if v is not None else None
        if len(toks) >= 2 and _is(toks[0], "(") and self.pairs.get(a) == b - 1:
            return self._literal(a + 1, b - 1)
        return None

    def trip_count(self, parts) -> tuple[int | None, str | None]:
        if not parts:
            return None, None
        toks = self.toks
        (ia, ib), (ca, cb), (sa, sb) = parts
        # init: [type] i = c0
        eq = next((k for k in range(ia, ib) if _is(toks[k], "=")), None)
        if eq is None or eq == ia or toks[eq - 1].kind != "ident":
            return None, None
        var = toks[eq - 1].text
        if any(_is(toks[k], ",") for k in range(ia, ib)):
            return None, var
        c0 = self._literal(eq + 1, ib)
        # condition: i < c1 | i <= c1
        if cb - ca < 3 or toks[ca].text != var or toks[ca + 1].text not in ("<", "<="):
            return None, var
        c1 = self._literal(ca + 2, cb)
        # step: i++ | ++i | i += c | i = i + c
        step_toks = [t.text for t in toks[sa:sb]]
        step: int | None = None
        if step_toks in ([var, "++"], ["++", var]):
            step = 1
        elif len(step_toks) >= 3 and step_toks[:2] == [var, "+="]:
            step = self._literal(sa + 2, sb)
        elif len(step_toks) >= 5 and step_toks[:4] == [var, "=", var, "+"]:
            step = self._literal(sa + 4, sb)
        if c0 is None or c1 is None or step is None or step <= 0:
            return None, var
        span = c1 - c0 + (1 if toks[ca + 1].text == "<=" else 0)
        return max(0, -(-span // step)), var

    def modifies(self, var: str, a: int, b: int) -> bool:
        for k in range(a, b):
            t = self.toks[k]
            if t.kind == "ident" and t.text == var and not _is(self.toks[k - 1], "."):
                if not _is(self.toks[k - 1], "->") and is_write(self.toks, self.pairs, k):
                    return True
        return False

    def calls(self) -> list[CallSite]:
        toks = self.toks
        out = []
        for k in range(self.brace + 1, self.close):
            t = toks[k]
            if t.kind != "ident" or t.text in KEYWORDS or not _is(toks[k + 1], "("):
                continue
            prev = toks[k - 1]
            if prev.kind == "punct" and prev.text in (".", "->"):
                continue
            if prev.kind == "ident" and (prev.text not in KEYWORDS or prev.text in TYPE_KEYWORDS
                                         or prev.text in QUALIFIERS or prev.text in STORAGE):
                continue
            if _is(prev, "*") and self._declares_pointer(k):
                continue
            in_loop = any(a <= k <= b or self._in_header(idx, k) for idx, (a, b) in enumerate(self.loop_ranges))
            out.append(CallSite(t.text, Span(t.start, toks[self.pairs[k + 1]].end), k, in_loop))
        return out

    def _in_header(self, idx: int, k: int) -> bool:
        lp = self.loops[idx]
        return lp.header_span.start <= self.toks[k].start < lp.header_span.end

    def _declares_pointer(self, k: int) -> bool:
        # "T *f(args);" inside a body is a declaration, not a call
        j = k - 1
        while j > self.brace and _is(self.toks[j], "*"):
            j -= 1
        t = self.toks[j]
        return t.kind == "ident" and (t.text in self.p.typedefs or t.text in TYPE_KEYWORDS)


def parse_unit(text: str | bytes) -> SourceUnit:
    """Parse one translation unit of the supported C subset."""
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="surrogateescape")
    return _Parser(text).parse()


def render(unit: SourceUnit) -> str:
    return unit.text


def render_bytes(unit: SourceUnit) -> bytes:
    return unit.text.encode("utf-8", errors="surrogateescape")
