"""Tokenizer for the supported C subset.

Whitespace is dropped but every token keeps its character offsets, so any
region of the original text can be recovered exactly.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from ..errors import UnsupportedConstruct

KEYWORDS = frozenset("""
auto break case char const continue default do double else enum extern float
for goto if inline int long register restrict return short signed sizeof
static struct switch typedef union unsigned void volatile while _Bool _Complex
_Static_assert _Alignas _Alignof _Noreturn __inline __inline__ __restrict
__restrict__ __attribute__ __extension__
""".split())

TYPE_KEYWORDS = frozenset(
    "char short int long float double signed unsigned void _Bool _Complex".split()
)
QUALIFIERS = frozenset(
    "const volatile restrict __restrict __restrict__ inline __inline __inline__ "
    "_Noreturn __extension__".split()
)
STORAGE = frozenset("static extern auto register typedef".split())

_PUNCTS = [
    ">>=", "<<=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##",
]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+|\n)
  | (?P<comment>/\*.*?\*/|//[^\n]*)
  | (?P<badcomment>/\*)
  | (?P<string>(?:u8|u|U|L)?"(?:[^"\\\n]|\\.)*")
  | (?P<char>(?:u|U|L)?'(?:[^'\\\n]|\\.)+')
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<number>\.?\d(?:[eEpP][+-]|[\w.])*)
  | (?P<punct>"""
    + "|".join(re.escape(p) for p in _PUNCTS)
    + r"""|[{}()\[\];,.<>=!~?:+\-*/%&|^#])
    """,
    re.VERBOSE | re.DOTALL,
)


class Token(NamedTuple):
    kind: str  # ident | number | string | char | punct | pp | comment
    text: str
    start: int
    end: int


def _directive_end(text: str, pos: int) -> int:
    """End offset of a preprocessor line starting at ``pos`` (newline excluded)."""
    n = len(text)
    i = pos
    while i < n:
        c = text[i]
        if c == "\\" and text.startswith("\n", i + 1):
            i += 2
            continue
        if c == "\\" and text.startswith("\r\n", i + 1):
            i += 3
            continue
        if c == "/" and text.startswith("*", i + 1):
            close = text.find("*/", i + 2)
            if close < 0:
                raise UnsupportedConstruct((i, n), "unterminated comment in directive")
            i = close + 2
            continue
        if c == "\n":
            return i
        i += 1
    return n


def tokenize(text: str, keep_comments: bool = False) -> list[Token]:
    toks: list[Token] = []
    pos = 0
    n = len(text)
    line_start = True
    while pos < n:
        if line_start:
            j = pos
            while j < n and text[j] in " \t":
                j += 1
            if j < n and text[j] == "#":
                end = _directive_end(text, j)
                toks.append(Token("pp", text[j:end], j, end))
                pos = end
                line_start = False
                continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise UnsupportedConstruct((pos, pos + 1), f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind == "badcomment":
            raise UnsupportedConstruct((pos, n), "unterminated comment")
        end = m.end()
        if kind == "ws":
            line_start = m.group() == "\n"
        else:
            if kind != "comment" or keep_comments:
                toks.append(Token(kind, m.group(), pos, end))
            # a block comment spanning lines does not reset line_start
            line_start = False
        pos = end
    return toks


def match_brackets(toks: list[Token]) -> dict[int, int]:
    """Map each opening bracket index to its closing index (and back)."""
    pairs: dict[int, int] = {}
    stack: list[int] = []
    closer = {")": "(", "]": "[", "}": "{"}
    for i, t in enumerate(toks):
        if t.kind != "punct":
            continue
        if t.text in "([{":
            stack.append(i)
        elif t.text in ")]}":
            if not stack or toks[stack[-1]].text != closer[t.text]:
                raise UnsupportedConstruct((t.start, t.end), f"unbalanced {t.text!r}")
            j = stack.pop()
            pairs[j] = i
            pairs[i] = j
    if stack:
        t = toks[stack[-1]]
        raise UnsupportedConstruct((t.start, t.end), f"unbalanced {t.text!r}")
    return pairs


INT_LITERAL = re.compile(r"(0[xX][0-9a-fA-F]+|0[0-7]*|[1-9]\d*)([uUlL]*)$")


def int_value(text: str) -> int | None:
    m = INT_LITERAL.match(text)
    if not m:
        return None
    body = m.group(1)
    if body.lower().startswith("0x"):
        return int(body, 16)
    if body.startswith("0") and len(body) > 1:
        return int(body, 8)
    return int(body)
