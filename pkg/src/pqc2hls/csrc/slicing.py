"""Call closures and standalone slices of a translation unit."""

from __future__ import annotations

from typing import Iterable, NamedTuple

from ..errors import UnknownFunction, UnresolvedDependency
from .model import SourceUnit, Span
from .parser import parse_unit

# libc and libm names a slice may reference without defining them
LIBC_EXTERNALS = frozenset("""
memcpy memset memmove memcmp strlen strcmp strncmp strcpy strncpy strcat
printf fprintf sprintf snprintf vprintf vfprintf puts putchar fputs fputc
scanf sscanf fscanf fgets getchar fread fwrite fopen fclose fflush
malloc calloc realloc free abort exit atexit assert abs labs llabs
sin cos tan asin acos atan atan2 sinh cosh tanh exp exp2 expm1 log log2 log10
log1p pow sqrt cbrt floor ceil round trunc fabs fmod fmin fmax ldexp frexp modf
sinf cosf tanf expf logf powf sqrtf floorf ceilf roundf truncf fabsf
""".split())


class Closure(NamedTuple):
    functions: list[str]
    external: list[str]


def call_closure(unit: SourceUnit, root: str) -> Closure:
    """Depth-first preorder over call edges; callees visited in sorted order."""
    defined = set(unit.function_names)
    if root not in defined:
        raise UnknownFunction(root)
    out: list[str] = []
    external: set[str] = set()
    seen: set[str] = set()

    def visit(name: str) -> None:
        seen.add(name)
        out.append(name)
        for callee in unit.callees(name):
            if callee in seen:
                continue
            if callee in defined:
                visit(callee)
            else:
                external.add(callee)

    visit(root)
    return Closure(out, sorted(external))


def initializers_for(unit: SourceUnit, closure: Iterable[str]) -> list[str]:
    """Parameterless functions outside the closure that write globals it reads."""
    names = set(closure)
    read: set[str] = set()
    for name in names:
        f = unit.function(name)
        read.update(f.reads_globals)
    found = []
    for f in unit.functions:
        if f.name in names or f.params:
            continue
        if read & set(f.writes_globals):
            found.append(f.name)
    return found


def slice_closure(unit: SourceUnit, root: str) -> list[str]:
    """The closure plus any initializers (and their closures) it depends on."""
    names = list(call_closure(unit, root).functions)
    pending = initializers_for(unit, names)
    while pending:
        for init in pending:
            for n in call_closure(unit, init).functions:
                if n not in names:
                    names.append(n)
        pending = [n for n in initializers_for(unit, names) if n not in names]
    return names


def _idents(unit: SourceUnit, span: Span) -> set[str]:
    return {
        t.text for t in unit.tokens
        if t.kind == "ident" and span.start <= t.start and t.end <= span.end
    }


def extract_slice(
    unit: SourceUnit, root: str, permitted: Iterable[str] = ()
) -> str:
    names = slice_closure(unit, root)
    allowed = LIBC_EXTERNALS | set(permitted) | {m.name for m in unit.macros}
    defined = set(unit.function_names)
    for name in names:
        for callee in unit.callees(name):
            if callee not in defined and callee not in allowed:
                raise UnresolvedDependency(callee)

    funcs = [unit.function(n) for n in names]
    used_globals: set[str] = set()
    for f in funcs:
        used_globals.update(f.reads_globals)
        used_globals.update(f.writes_globals)

    spans: set[Span] = set(unit.directives)
    refs: set[str] = set()
    for f in funcs:
        spans.add(f.span)
        refs |= _idents(unit, f.span)
    for g in unit.globals:
        if g.name in used_globals:
            spans.add(g.span)
            refs |= _idents(unit, g.span)
    for p in unit.prototypes:
        if p.name in names:
            spans.add(p.span)
            refs |= _idents(unit, p.span)

    # types referenced directly or through other included types
    remaining = list(unit.types)
    changed = True
    while changed:
        changed = False
        for t in list(remaining):
            keys = set(t.names) | set(t.enumerators) | ({t.tag} if t.tag else set())
            if keys & refs:
                spans.add(t.span)
                refs |= _idents(unit, t.span)
                remaining.remove(t)
                changed = True

    parts = []
    for span in sorted(spans):
        text = unit.slice_text(span)
        is_fn = any(f.span == span for f in funcs)
        if is_fn and parts:
            parts.append("")
        parts.append(text)
    return "\n".join(parts) + "\n"


def extract_slice_unit(unit: SourceUnit, root: str, permitted: Iterable[str] = ()) -> SourceUnit:
    return parse_unit(extract_slice(unit, root, permitted))
