from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .lexer import Token


class Span(NamedTuple):
    start: int
    end: int

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def strictly_contains(self, other: "Span") -> bool:
        return self.contains(other) and self != other

    def __str__(self) -> str:
        return f"{self.start}..{self.end}"


@dataclass(frozen=True)
class ParamInfo:
    name: str
    base: str  # specifiers, e.g. "const uint8_t"
    pointer_depth: int
    dims: tuple[str, ...]
    span: Span
    is_aggregate: bool = False
    is_void_pointer: bool = False
    is_function_pointer: bool = False

    @property
    def is_pointer(self) -> bool:
        return self.pointer_depth > 0 and not self.dims and not self.is_function_pointer

    @property
    def is_array(self) -> bool:
        return bool(self.dims)

    @property
    def is_const(self) -> bool:
        return "const" in self.base.split()

    @property
    def type_text(self) -> str:
        stars = "*" * self.pointer_depth
        dims = "".join(f"[{d}]" for d in self.dims)
        return f"{self.base} {stars}{dims}".rstrip()

    def declaration(self, name: str | None = None) -> str:
        stars = "*" * self.pointer_depth
        dims = "".join(f"[{d}]" for d in self.dims)
        return f"{self.base} {stars}{name or self.name}{dims}"


@dataclass(frozen=True)
class LoopInfo:
    span: Span
    trip_count: int | None
    nesting_depth: int
    kind: str = "for"
    index: int = 0
    header_span: Span = Span(0, 0)
    body_span: Span = Span(0, 0)
    var: str | None = None
    body_statements: int = 0


@dataclass(frozen=True)
class StmtInfo:
    """A simple statement (expression, declaration, jump) inside a body."""

    kind: str  # expr | decl | return | jump
    span: Span  # includes the terminating ';'
    tok_start: int
    tok_end: int  # exclusive, index after ';'
    loop_depth: int
    parent_control: bool  # sole body of an if/else/for/while without braces


@dataclass(frozen=True)
class CallSite:
    callee: str
    span: Span  # identifier through closing paren
    name_tok: int
    in_loop: bool


@dataclass(frozen=True)
class FunctionInfo:
    name: str
    span: Span
    signature_span: Span
    body_span: Span
    params: tuple[ParamInfo, ...]
    loops: tuple[LoopInfo, ...]
    writes_globals: tuple[str, ...]
    reads_globals: tuple[str, ...]
    calls: tuple[CallSite, ...]
    statements: tuple[StmtInfo, ...]
    locals: tuple[str, ...]
    prefix: str  # specifiers and return type, text before the name
    name_span: Span
    params_span: Span  # inside the parentheses
    tok_range: tuple[int, int]  # body tokens: '{' index .. '}' index

    @property
    def returns_void(self) -> bool:
        words = self.prefix.replace("*", " * ").split()
        return "void" in words and "*" not in words

    @property
    def is_void_params(self) -> bool:
        return not self.params


@dataclass(frozen=True)
class GlobalInfo:
    name: str
    span: Span  # the whole declaration, through ';'
    is_array: bool
    element_count: int | None
    is_const_qualified: bool
    has_initializer: bool
    base: str = ""
    pointer_depth: int = 0
    dims: tuple[str, ...] = ()
    declarator_span: Span = Span(0, 0)
    shared: bool = False  # declared together with other names


@dataclass(frozen=True)
class FieldDecl:
    name: str
    base: str
    pointer_depth: int
    dims: tuple[str, ...]
    nested: "StructDef | None" = None


@dataclass(frozen=True)
class StructDef:
    kind: str  # struct | union
    tag: str | None
    fields: tuple[FieldDecl, ...]


@dataclass(frozen=True)
class TypeDecl:
    span: Span
    names: tuple[str, ...]  # typedef names declared here
    tag: str | None  # struct/union/enum tag defined here
    kind: str  # typedef | struct | union | enum
    struct: StructDef | None = None
    target: str = ""  # aliased type text for plain typedefs
    target_pointer: int = 0
    enumerators: tuple[str, ...] = ()


@dataclass(frozen=True)
class Prototype:
    name: str
    span: Span


@dataclass(frozen=True)
class Macro:
    name: str
    span: Span
    function_like: bool
    body: str


@dataclass(frozen=True)
class Include:
    name: str
    span: Span
    system: bool


@dataclass(frozen=True)
class CallEdge:
    caller: str
    callee: str
    span: Span


@dataclass(frozen=True)
class SourceUnit:
    text: str
    functions: tuple[FunctionInfo, ...]
    globals: tuple[GlobalInfo, ...]
    includes: tuple[Include, ...]
    call_edges: tuple[CallEdge, ...]
    types: tuple[TypeDecl, ...] = ()
    prototypes: tuple[Prototype, ...] = ()
    macros: tuple[Macro, ...] = ()
    directives: tuple[Span, ...] = ()
    tokens: tuple[Token, ...] = field(default=(), compare=False, repr=False)
    pairs: dict[int, int] = field(default_factory=dict, compare=False, repr=False)

    def function(self, name: str) -> FunctionInfo | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def global_(self, name: str) -> GlobalInfo | None:
        for g in self.globals:
            if g.name == name:
                return g
        return None

    @property
    def function_names(self) -> list[str]:
        return [f.name for f in self.functions]

    @property
    def typedef_names(self) -> set[str]:
        return {n for t in self.types for n in t.names}

    def macro(self, name: str) -> Macro | None:
        for m in self.macros:
            if m.name == name:
                return m
        return None

    def slice_text(self, span: Span) -> str:
        return self.text[span.start:span.end]

    def callees(self, name: str) -> list[str]:
        return sorted({e.callee for e in self.call_edges if e.caller == name})

    def callers(self, name: str) -> list[str]:
        return sorted({e.caller for e in self.call_edges if e.callee == name})
