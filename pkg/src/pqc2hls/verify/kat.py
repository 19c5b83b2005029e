"""Known-answer test suites in an rsp-like text format."""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ParseError, SchemaMismatch
from .rng import Xoshiro256

_HEX = re.compile(r"^[0-9a-fA-F]*$")
_DOMAIN = re.compile(r"^(u|i|f)(8|16|32|64):([^:]+):([^:]+)$")


@dataclass(frozen=True)
class FieldSpec:
    name: str
    direction: str  # in | out
    length: int
    # element domain for generated inputs, e.g. "u64:0:511" or "f64:-1:1"; raw bytes when None
    domain: str | None = None

    def __post_init__(self):
        if self.direction not in ("in", "out"):
            raise ValueError(f"field {self.name}: direction must be in/out")
        if self.length < 0:
            raise ValueError(f"field {self.name}: negative length")
        if self.domain is not None:
            m = _DOMAIN.match(self.domain)
            if not m:
                raise ValueError(f"field {self.name}: bad domain {self.domain!r}")
            size = int(m.group(2)) // 8
            if m.group(1) == "f" and size not in (4, 8):
                raise ValueError(f"field {self.name}: float domains are f32 or f64")
            if self.length % size:
                raise ValueError(f"field {self.name}: length {self.length} not a multiple of {size}")

    def header(self) -> str:
        return f"{self.name}:{self.direction}:{self.length}"

    def to_dict(self) -> dict:
        d = {"name": self.name, "direction": self.direction, "length": self.length}
        if self.domain:
            d["domain"] = self.domain
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FieldSpec":
        return cls(d["name"], d["direction"], int(d["length"]), d.get("domain"))

    def draw(self, rng: Xoshiro256) -> bytes:
        if self.domain is None:
            return rng.bytes(self.length)
        kind, bits, lo, hi = _DOMAIN.match(self.domain).groups()
        size = int(bits) // 8
        out = bytearray()
        for _ in range(self.length // size):
            if kind == "f":
                x = float(lo) + (float(hi) - float(lo)) * rng.unit_float()
                out += struct.pack("<d" if size == 8 else "<f", x)
            else:
                a, b = int(lo, 0), int(hi, 0)
                v = a + rng.below(b - a + 1)
                out += v.to_bytes(size, "little", signed=kind == "i")
        return bytes(out)


Schema = tuple[FieldSpec, ...]


def schema_header(schema: Schema) -> str:
    return ",".join(f.header() for f in schema)


def parse_schema(text: str, line: int = 0) -> Schema:
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        parts = item.split(":")
        if len(parts) != 3 or not parts[2].isdigit():
            raise ParseError(line, f"bad schema entry {item!r}")
        try:
            out.append(FieldSpec(parts[0], parts[1], int(parts[2])))
        except ValueError as exc:
            raise ParseError(line, str(exc)) from None
    return tuple(out)


@dataclass
class KatCase:
    count: int
    values: dict[str, bytes] = field(default_factory=dict)


@dataclass
class KatSuite:
    cases: list[KatCase]
    schema: Schema
    seed: int | None = None

    def __post_init__(self):
        self.schema = tuple(self.schema)
        for i, c in enumerate(self.cases):
            check_case(self.schema, c, i)

    def __len__(self) -> int:
        return len(self.cases)

    @property
    def inputs(self) -> list[FieldSpec]:
        return [f for f in self.schema if f.direction == "in"]

    @property
    def outputs(self) -> list[FieldSpec]:
        return [f for f in self.schema if f.direction == "out"]

    def dumps(self) -> str:
        lines = []
        if self.seed is not None:
            lines.append(f"# seed = {self.seed}")
        lines.append(f"# schema = {schema_header(self.schema)}")
        for c in self.cases:
            lines.append("")
            lines.append(f"count = {c.count}")
            for f in self.schema:
                lines.append(f"{f.name} = {c.values[f.name].hex()}".rstrip())
        return "\n".join(lines) + "\n"

    def dump(self, path: Path | str) -> None:
        Path(path).write_text(self.dumps(), encoding="ascii")


def check_case(schema: Schema, case: KatCase, index: int) -> None:
    if case.count != index:
        raise SchemaMismatch(index, f"(count = {case.count}, expected {index})")
    names = [f.name for f in schema]
    if set(case.values) != set(names):
        missing = [n for n in names if n not in case.values]
        extra = [n for n in case.values if n not in names]
        raise SchemaMismatch(index, f"(missing {missing}, unexpected {extra})")
    for f in schema:
        if len(case.values[f.name]) != f.length:
            raise SchemaMismatch(index, f"(field {f.name} has {len(case.values[f.name])} bytes, expected {f.length})")


def _infer_schema(case: KatCase) -> Schema:
    """Without a schema header, ``*_out`` and ``ret`` fields are outputs."""
    return tuple(
        FieldSpec(n, "out" if n == "ret" or n.endswith("_out") else "in", len(v))
        for n, v in case.values.items()
    )


def loads(text: str) -> KatSuite:
    seed = None
    schema: Schema | None = None
    cases: list[KatCase] = []
    cur: KatCase | None = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, val = (s.strip() for s in body.partition("="))
                if key == "seed":
                    try:
                        seed = int(val, 0)
                    except ValueError:
                        raise ParseError(no, f"bad seed {val!r}") from None
                elif key == "schema":
                    schema = parse_schema(val, no)
            continue
        if line.startswith("[") and line.endswith("]"):
            continue
        if "=" not in line:
            raise ParseError(no, f"expected 'name = value', got {line[:40]!r}")
        key, _, val = (s.strip() for s in line.partition("="))
        if key == "count":
            try:
                n = int(val)
            except ValueError:
                raise ParseError(no, f"bad count {val!r}") from None
            cur = KatCase(n)
            cases.append(cur)
            continue
        if cur is None:
            raise ParseError(no, f"field {key} before any count line")
        if not _HEX.match(val):
            raise ParseError(no, f"non-hex value for {key}")
        if len(val) % 2:
            raise ParseError(no, f"odd-length hex for {key}")
        if key in cur.values:
            raise ParseError(no, f"duplicate field {key}")
        cur.values[key] = bytes.fromhex(val)
    if schema is None:
        schema = _infer_schema(cases[0]) if cases else ()
    return KatSuite(cases, schema, seed)


def load_kats(path: Path | str) -> KatSuite:
    return loads(Path(path).read_text(encoding="ascii", errors="replace"))


@dataclass(frozen=True)
class Mismatch:
    case: int
    field: str
    expected: str
    actual: str

    def describe(self) -> str:
        return f"case {self.case}, field {self.field}\nexpected: {self.expected}\nactual:   {self.actual}"


@dataclass(frozen=True)
class KatOutcome:
    passed: int
    failed: int
    first_mismatch: Mismatch | None = None

    def __post_init__(self):
        if (self.failed > 0) != (self.first_mismatch is not None):
            raise ValueError("first_mismatch must be present exactly when cases failed")

    @property
    def ok(self) -> bool:
        return self.failed == 0

    @property
    def total(self) -> int:
        return self.passed + self.failed
