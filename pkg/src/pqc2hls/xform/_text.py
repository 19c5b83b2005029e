"""Small text helpers shared by the transforms."""

from __future__ import annotations

from ..csrc.model import FunctionInfo, SourceUnit, Span, StmtInfo


def line_bounds(text: str, span: Span) -> tuple[int, int]:
    start = text.rfind("\n", 0, span.start) + 1
    end = text.find("\n", span.end)
    return start, (len(text) if end < 0 else end)


def owns_lines(text: str, span: Span) -> bool:
    """True when only whitespace shares the lines of ``span``."""
    a, b = line_bounds(text, span)
    return not text[a:span.start].strip() and not text[span.end:b].strip()


def removal(text: str, span: Span, sole: bool = False) -> tuple[Span, str]:
    """Replacement that deletes a statement or definition cleanly.

    A statement that is the only body of a control construct becomes ``;``.
    When the span owns its lines, the lines go too.
    """
    if sole:
        return span, ";"
    if owns_lines(text, span):
        a, b = line_bounds(text, span)
        return Span(a, min(b + 1, len(text))), ""
    return span, ""


def definition_removal(text: str, span: Span) -> tuple[Span, str]:
    """Delete a top-level definition plus one following blank line."""
    sp, rep = removal(text, span)
    end = sp.end
    if sp.end > span.end:
        # swallow one blank line after the definition
        nxt = text.find("\n", end)
        if nxt >= 0 and not text[end:nxt].strip():
            end = nxt + 1
    return Span(sp.start, end), rep


def indent_of(text: str, pos: int) -> str:
    a = text.rfind("\n", 0, pos) + 1
    b = a
    while b < len(text) and text[b] in " \t":
        b += 1
    return text[a:b]


def fresh_name(unit: SourceUnit, base: str, taken: set[str] | None = None) -> str:
    used = {t.text for t in unit.tokens if t.kind == "ident"} | (taken or set())
    if base not in used:
        return base
    i = 2
    while f"{base}{i}" in used:
        i += 1
    return f"{base}{i}"


def statement_tokens(unit: SourceUnit, st: StmtInfo) -> list[str]:
    return [t.text for t in unit.tokens[st.tok_start:st.tok_end]]


def is_call_statement(unit: SourceUnit, st: StmtInfo, callee: str) -> bool:
    """``callee(...);`` and nothing else."""
    toks = unit.tokens
    a, b = st.tok_start, st.tok_end
    if b - a < 4 or toks[a].text != callee or toks[a + 1].text != "(":
        return False
    return unit.pairs.get(a + 1) == b - 2


def header_insertion_point(unit: SourceUnit) -> int:
    """Offset just after the last leading #include line, or 0."""
    pos = 0
    for inc in unit.includes:
        first_code = min((f.span.start for f in unit.functions), default=len(unit.text))
        if inc.span.start < first_code:
            end = unit.text.find("\n", inc.span.end)
            pos = len(unit.text) if end < 0 else end + 1
    return pos


def signature_text(unit: SourceUnit, f: FunctionInfo, name: str | None = None,
                   params: str | None = None) -> str:
    prefix = " ".join(f.prefix.split())
    if prefix.endswith("*"):
        head = prefix
    else:
        head = prefix + " "
    p = unit.text[f.params_span.start:f.params_span.end] if params is None else params
    return f"{head}{name or f.name}({p})"
