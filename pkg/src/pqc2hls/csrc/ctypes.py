"""Scalar type resolution with LP64 sizes."""

from __future__ import annotations

from dataclasses import dataclass

from .lexer import QUALIFIERS, STORAGE
from .model import SourceUnit, StructDef

# (size in bytes, kind) where kind is "u", "i" or "f"
_FIXED = {
    "int8_t": (1, "i"), "int16_t": (2, "i"), "int32_t": (4, "i"), "int64_t": (8, "i"),
    "uint8_t": (1, "u"), "uint16_t": (2, "u"), "uint32_t": (4, "u"), "uint64_t": (8, "u"),
    "size_t": (8, "u"), "ssize_t": (8, "i"), "ptrdiff_t": (8, "i"),
    "intptr_t": (8, "i"), "uintptr_t": (8, "u"), "intmax_t": (8, "i"), "uintmax_t": (8, "u"),
    "bool": (1, "u"),
}
for _w in (8, 16, 32, 64):
    # glibc on x86-64 widens the 16- and 32-bit fast types to 64 bits
    _fast = 1 if _w == 8 else 8
    _FIXED[f"int_least{_w}_t"] = (_w // 8, "i")
    _FIXED[f"uint_least{_w}_t"] = (_w // 8, "u")
    _FIXED[f"int_fast{_w}_t"] = (_fast, "i")
    _FIXED[f"uint_fast{_w}_t"] = (_fast, "u")


@dataclass(frozen=True)
class Scalar:
    size: int
    kind: str  # u | i | f

    @property
    def code(self) -> str:
        return f"{self.kind}{self.size * 8}"


@dataclass(frozen=True)
class Resolved:
    scalar: Scalar | None = None
    struct: StructDef | None = None
    pointer_depth: int = 0
    dims: tuple[str, ...] = ()
    is_void: bool = False
    name: str = ""  # canonical spelling of the innermost type


def builtin_scalar(words: list[str]) -> Scalar | None:
    ws = [w for w in words if w not in QUALIFIERS and w not in STORAGE]
    if not ws:
        return None
    if len(ws) == 1 and ws[0] in _FIXED:
        size, kind = _FIXED[ws[0]]
        return Scalar(size, kind)
    unsigned = "unsigned" in ws
    longs = ws.count("long")
    if "_Bool" in ws:
        return Scalar(1, "u")
    if "float" in ws:
        return Scalar(4, "f")
    if "double" in ws:
        return Scalar(16 if longs else 8, "f")
    kind = "u" if unsigned else "i"
    if "char" in ws:
        return Scalar(1, kind)
    if "short" in ws:
        return Scalar(2, kind)
    if longs:
        return Scalar(8, kind)
    if set(ws) <= {"int", "signed", "unsigned"}:
        return Scalar(4, kind)
    return None


class TypeEnv:
    """Resolves typedef chains of one unit down to scalars or aggregates."""

    def __init__(self, unit: SourceUnit):
        self.typedefs: dict[str, tuple[str, int, StructDef | None, tuple[str, ...]]] = {}
        self.tags: dict[str, StructDef] = {}
        self.enums: set[str] = set()
        for t in unit.types:
            if t.struct is not None and t.tag:
                self.tags[t.tag] = t.struct
            if t.kind == "enum" and t.tag:
                self.enums.add(t.tag)
            if t.kind == "typedef":
                for name in t.names:
                    self.typedefs[name] = (t.target, t.target_pointer, t.struct, ())
                if t.tag and t.enumerators:
                    self.enums.add(t.tag)
                if t.enumerators:
                    for name in t.names:
                        self.typedefs[name] = ("int", t.target_pointer, None, ())

    def resolve(self, base: str, pointer_depth: int = 0, dims: tuple[str, ...] = ()) -> Resolved:
        words = [w for w in base.split() if w not in QUALIFIERS and w not in STORAGE]
        ptr = pointer_depth
        seen: set[str] = set()
        while True:
            if len(words) == 2 and words[0] in ("struct", "union"):
                return Resolved(struct=self.tags.get(words[1]), pointer_depth=ptr, dims=dims,
                                name=" ".join(words))
            if len(words) == 2 and words[0] == "enum":
                return Resolved(scalar=Scalar(4, "i"), pointer_depth=ptr, dims=dims, name="int")
            if words == ["void"]:
                return Resolved(pointer_depth=ptr, dims=dims, is_void=True, name="void")
            if len(words) == 1 and words[0] in self.typedefs and words[0] not in seen:
                seen.add(words[0])
                target, tptr, struct, _ = self.typedefs[words[0]]
                if struct is not None:
                    return Resolved(struct=struct, pointer_depth=ptr + tptr, dims=dims, name=words[0])
                ptr += tptr
                words = [w for w in target.split() if w not in QUALIFIERS and w not in STORAGE]
                continue
            scalar = builtin_scalar(words)
            return Resolved(scalar=scalar, pointer_depth=ptr, dims=dims, name=" ".join(words))

    def scalar(self, base: str) -> Scalar | None:
        r = self.resolve(base)
        return r.scalar if r.pointer_depth == 0 else None

    def is_float(self, base: str) -> bool:
        s = self.scalar(base)
        return s is not None and s.kind == "f"

    def struct_of(self, base: str) -> StructDef | None:
        r = self.resolve(base)
        return r.struct
