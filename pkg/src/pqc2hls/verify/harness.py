"""Schema inference, harness generation and KAT execution.

Wire protocol: the harness takes the case count as its only argument, then
per case reads one hex line per input field (schema order) from stdin and
prints one hex line per output field followed by a blank line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from ..blockers import is_init_function
from ..csrc.aggregates import Leaf, find_uses, struct_leaves
from ..csrc.ctypes import TypeEnv
from ..csrc.lexer import QUALIFIERS, STORAGE, int_value
from ..csrc.parser import ASSIGN_OPS, access_end
from ..csrc.model import FunctionInfo, ParamInfo, SourceUnit
from ..errors import (
    ExecutionFailed,
    Pqc2HlsError,
    ProtocolError,
    SchemaBindingError,
    UnknownFunction,
    VerifyError,
)
from .kat import FieldSpec, KatCase, KatOutcome, KatSuite, Mismatch, Schema
from .rng import Xoshiro256
from .toolchain import BuildResult, ToolchainConfig, build, run_process

KERNEL_FILE = "kernel.c"
HARNESS_FILE = "harness.c"


def _plain(base: str) -> str:
    return " ".join(w for w in base.split() if w not in QUALIFIERS and w not in STORAGE)


def _const_int(unit: SourceUnit, text: str, depth: int = 0) -> int | None:
    text = text.strip()
    v = int_value(text)
    if v is not None or depth > 8:
        return v
    m = unit.macro(text)
    if m is not None and not m.function_like:
        body = m.body.strip()
        while body.startswith("(") and body.endswith(")"):
            body = body[1:-1].strip()
        return _const_int(unit, body, depth + 1)
    return None


def opaque_struct_type(unit: SourceUnit, f: FunctionInfo, p: ParamInfo) -> str | None:
    """Type name behind a ``void *`` parameter: ``T *x = [(T *)]p;`` or ``T *x; ... x = p;``."""
    env = TypeEnv(unit)
    toks = unit.tokens
    texts = [[t.text for t in toks[st.tok_start:st.tok_end]] for st in f.statements]
    assigned = {t[0] for t in texts if len(t) == 4 and t[1:] == ["=", p.name, ";"]}
    for st, ts in zip(f.statements, texts):
        if st.kind != "decl" or "*" not in ts:
            continue
        star = ts.index("*")
        if not star or star + 1 >= len(ts):
            continue
        direct = ts[-2:] == [p.name, ";"]
        later = ts[star + 2:] == [";"] and ts[star + 1] in assigned
        base = " ".join(ts[:star])
        if (direct or later) and env.resolve(base).struct is not None:
            return _plain(base)
    return None


@dataclass(frozen=True)
class _Slot:
    """One harness variable: how it is declared, passed and (de)serialized."""

    var: str
    decl: str
    arg: str
    fields: tuple[tuple[FieldSpec, str], ...]  # (field, lvalue expression)


def _deref_write(toks, pairs, k: int) -> tuple[bool, bool] | None:
    """(written, read) when ident k sits under a unary ``*``: ``*p`` or ``*(p + e)``."""
    star, end = k - 1, k + 1
    if toks[star].text == "(" and toks[star - 1].text == "*":
        close = pairs.get(star)
        if close is None:
            return None
        star, end = star - 1, close + 1
    if toks[star].text != "*":
        return None
    before = toks[star - 1]
    if before.kind in ("ident", "number", "string", "char") and before.text not in ("return", "case"):
        return None  # multiplication
    if before.text == "]":
        return None
    if before.text == ")":
        # only a closed control header keeps the star unary: `for (...) *p = 0;`
        opener = next((o for o, c in pairs.items() if c == star - 1), None)
        if opener is None or toks[opener - 1].text not in ("for", "if", "while", "switch"):
            return None
    nxt = toks[end].text if end < len(toks) else ""
    if before.text in ("++", "--") or nxt in ("++", "--"):
        return True, True
    if nxt in ASSIGN_OPS:
        return True, nxt != "="
    return False, True


class _Binder:
    def __init__(self, unit: SourceUnit, top_fn: str, extents: Mapping[str, int] | None = None):
        self.unit = unit
        self.f = unit.function(top_fn)
        if self.f is None:
            raise UnknownFunction(top_fn)
        self.env = TypeEnv(unit)
        self.extents = dict(extents or {})

    def elem_size(self, base: str, param: str) -> int:
        sc = self.env.scalar(base)
        if sc is None:
            raise SchemaBindingError(param, f"(element type {base!r} is not a scalar)")
        return sc.size

    def count(self, dims: Sequence[str], param: str) -> int:
        n = 1
        for d in dims:
            v = _const_int(self.unit, d)
            if v is None:
                raise SchemaBindingError(param, f"(extent {d!r} is not constant)")
            n *= v
        return n

    def usage(self, p: ParamInfo) -> tuple[bool, bool]:
        """(read, written) for an array-like parameter."""
        read = written = False
        toks = self.unit.tokens
        for u in find_uses(self.unit, self.f, p.name):
            if u.kind in ("arg", "addr"):
                read = written = True
            elif u.kind == "access":
                deref = _deref_write(toks, self.unit.pairs, u.first_tok)
                if deref is not None:
                    written = written or deref[0]
                    read = read or deref[1]
                elif u.write:
                    written = True
                    j = access_end(toks, self.unit.pairs, u.first_tok)
                    if j >= len(toks) or toks[j].text != "=":
                        read = True
                else:
                    read = True
        return read, written

    def slots(self, domains: Mapping[str, str]) -> tuple[list[_Slot], _Slot | None]:
        out = []
        for p in self.f.params:
            out.append(self.slot(p, domains))
        ret = None
        prefix = _plain(self.f.prefix.replace("inline", " ").replace("*", " * "))
        if not self.f.returns_void:
            if "*" in prefix.split():
                raise SchemaBindingError("return", "(pointer return values cannot be compared)")
            size = self.elem_size(prefix, "return")
            spec = FieldSpec("ret", "out", size)
            ret = _Slot("kat_ret", f"{prefix} kat_ret;", "", ((spec, "kat_ret"),))
        return out, ret

    def slot(self, p: ParamInfo, domains: Mapping[str, str]) -> _Slot:
        var = f"kat_{p.name}"
        if p.is_function_pointer:
            raise SchemaBindingError(p.name, "(function pointer)")
        struct_type = None
        if p.is_void_pointer:
            struct_type = opaque_struct_type(self.unit, self.f, p)
            if struct_type is None:
                raise SchemaBindingError(p.name, "(opaque pointer with no visible aggregate type)")
        else:
            r = self.env.resolve(p.base)
            if r.struct is not None:
                if p.pointer_depth + r.pointer_depth != 1 or p.dims:
                    raise SchemaBindingError(p.name, "(aggregate passed by value)")
                struct_type = _plain(p.base)
        if struct_type is not None:
            return self.aggregate(p, var, struct_type, domains)

        base = _plain(p.base)
        size = self.elem_size(p.base, p.name)
        if p.dims or p.pointer_depth == 1:
            if p.dims:
                dims = "".join(f"[{d}]" for d in p.dims)
                n = self.count(p.dims, p.name)
            else:
                n = int(self.extents.get(p.name, 1))
                dims = f"[{n}]"
            read, written = self.usage(p)
            if p.is_const:
                written = False
            fields = []
            if read or not written:
                fields.append((self.spec(p.name, "in", size * n, domains, p.base), var))
            if written:
                fields.append((self.spec(f"{p.name}_out", "out", size * n, domains, p.base), var))
            return _Slot(var, f"static {base} {var}{dims};", var, tuple(fields))
        if p.pointer_depth:
            raise SchemaBindingError(p.name, "(multi-level pointer)")
        spec = self.spec(p.name, "in", size, domains, p.base)
        return _Slot(var, f"{base} {var};", var, ((spec, var),))

    def spec(self, name: str, direction: str, length: int, domains: Mapping[str, str], base: str) -> FieldSpec:
        domain = None
        if direction == "in":
            domain = domains.get(name)
            if domain is None and self.env.is_float(base):
                # random bit patterns would be mostly NaN/huge; default to [-1, 1]
                domain = f"f{self.env.scalar(base).size * 8}:-1:1"
        return FieldSpec(name, direction, length, domain)

    def aggregate(self, p: ParamInfo, var: str, type_name: str, domains: Mapping[str, str]) -> _Slot:
        struct = self.env.resolve(type_name).struct
        try:
            leaves: list[Leaf] = struct_leaves(self.env, struct)
        except Pqc2HlsError as exc:
            raise SchemaBindingError(p.name, f"({exc})") from None
        const = p.is_const and not p.is_void_pointer
        ins, outs = [], []
        for leaf in leaves:
            if leaf.pointer_depth:
                raise SchemaBindingError(p.name, f"(pointer field {leaf.access})")
            size = self.elem_size(leaf.base, p.name) * self.count(leaf.dims, p.name)
            name = f"{p.name}_{leaf.name}"
            expr = f"{var}.{leaf.access}"
            ins.append((self.spec(name, "in", size, domains, leaf.base), expr))
            if not const:
                outs.append((self.spec(f"{name}_out", "out", size, domains, leaf.base), expr))
        return _Slot(var, f"static {type_name} {var};", f"&{var}", tuple(ins + outs))


def infer_schema(
    unit: SourceUnit,
    top_fn: str,
    domains: Mapping[str, str] | None = None,
    extents: Mapping[str, int] | None = None,
) -> Schema:
    """Inputs in parameter order, then outputs in parameter order, then ``ret``."""
    slots, ret = _Binder(unit, top_fn, extents).slots(domains or {})
    fields = [f for s in slots for f, _ in s.fields]
    if ret is not None:
        fields.append(ret.fields[0][0])
    ins = [f for f in fields if f.direction == "in"]
    outs = [f for f in fields if f.direction == "out"]
    return tuple(ins + outs)


_PRELUDE = r"""#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static char kat_line_[%(line)d];

static int kat_read_(void *dst, size_t n)
{
    unsigned char *p = (unsigned char *)dst;
    size_t i, len;
    if (!fgets(kat_line_, sizeof kat_line_, stdin))
        return 0;
    len = strcspn(kat_line_, "\r\n");
    if (len != 2 * n)
        return -1;
    for (i = 0; i < n; i++) {
        unsigned v;
        if (sscanf(kat_line_ + 2 * i, "%%2x", &v) != 1)
            return -1;
        p[i] = (unsigned char)v;
    }
    return 1;
}

static void kat_write_(const void *src, size_t n)
{
    const unsigned char *p = (const unsigned char *)src;
    size_t i;
    for (i = 0; i < n; i++)
        printf("%%02x", p[i]);
    putchar('\n');
}
"""


def gen_harness(
    unit: SourceUnit,
    top_fn: str,
    schema: Schema,
    extents: Mapping[str, int] | None = None,
    kernel_file: str = KERNEL_FILE,
) -> str:
    binder = _Binder(unit, top_fn, extents)
    if unit.function("main") is not None:
        raise SchemaBindingError("main", "(the unit already defines main)")
    slots, ret = binder.slots({f.name: f.domain for f in schema if f.domain})
    by_name = {f.name: f for f in schema}
    bound: set[str] = set()
    for s in slots + ([ret] if ret else []):
        for spec, _ in s.fields:
            want = by_name.get(spec.name)
            if want is None or want.direction != spec.direction or want.length != spec.length:
                param = s.var[len("kat_"):] if s is not ret else "return"
                detail = "(no field)" if want is None else f"(field {spec.name} is {want.header()}, need {spec.header()})"
                raise SchemaBindingError(param, detail)
            bound.add(spec.name)
    extra = [f.name for f in schema if f.name not in bound]
    if extra:
        raise SchemaBindingError(extra[0], "(schema field has no parameter)")

    exprs = {spec.name: expr for s in slots + ([ret] if ret else []) for spec, expr in s.fields}
    longest = max((f.length for f in schema), default=0)
    lines = [f"/* KAT harness for {top_fn} */", _PRELUDE % {"line": 2 * longest + 4}]
    lines.append(f'#include "{kernel_file}"\n')
    lines.append("int main(int argc, char **argv)\n{")
    lines.append("    long kat_n_, kat_i_;")
    for s in slots:
        lines.append(f"    {s.decl}")
    if ret is not None:
        lines.append(f"    {ret.decl}")
    lines.append("    kat_n_ = argc > 1 ? strtol(argv[1], NULL, 10) : 0;")
    for g in unit.functions:
        if g.name != top_fn and not g.params and is_init_function(unit, g.name):
            lines.append(f"    {g.name}();")
    lines.append("    for (kat_i_ = 0; kat_i_ < kat_n_; kat_i_++) {")
    for s in slots:
        if s.decl.startswith("static"):
            lines.append(f"        memset(&{s.var}, 0, sizeof {s.var});")
    for f in schema:
        if f.direction == "in":
            lines.append(f"        if (kat_read_(&{exprs[f.name]}, {f.length}) != 1)\n            return 3;")
    call = f"{top_fn}({', '.join(s.arg for s in slots)});"
    lines.append(f"        {'kat_ret = ' if ret else ''}{call}")
    for f in schema:
        if f.direction == "out":
            lines.append(f"        kat_write_(&{exprs[f.name]}, {f.length});")
    lines.append("        putchar('\\n');")
    lines.append("    }")
    lines.append("    return 0;\n}\n")
    return "\n".join(lines)


def build_harness(
    code: str,
    top_fn: str,
    schema: Schema,
    toolchain: ToolchainConfig,
    workdir: Path | str,
    headers: Mapping[str, str] | None = None,
    extents: Mapping[str, int] | None = None,
    unit: SourceUnit | None = None,
) -> BuildResult:
    from ..csrc.parser import parse_unit

    unit = unit or parse_unit(code)
    harness = gen_harness(unit, top_fn, schema, extents)
    files = {KERNEL_FILE: code, **(headers or {})}
    return build({HARNESS_FILE: harness}, toolchain, workdir, headers=files, output="kat_harness")


def _stdin(schema: Schema, cases: Sequence[KatCase]) -> str:
    ins = [f for f in schema if f.direction == "in"]
    return "".join(c.values[f.name].hex() + "\n" for c in cases for f in ins)


def execute(binary: Path | str, schema: Schema, cases: Sequence[KatCase], timeout: float) -> list[dict[str, bytes]]:
    """Run the harness over ``cases`` and parse its framed output."""
    res = run_process([str(binary), str(len(cases))], timeout, stdin=_stdin(schema, cases))
    if res.status != 0:
        raise ExecutionFailed(res.status, res.stderr)
    outs = [f for f in schema if f.direction == "out"]
    lines = res.stdout.split("\n")
    results = []
    pos = 0
    for i in range(len(cases)):
        got: dict[str, bytes] = {}
        for f in outs:
            if pos >= len(lines):
                raise ProtocolError(i, "(output ended early)")
            text = lines[pos].strip()
            pos += 1
            if len(text) != 2 * f.length:
                raise ProtocolError(i, f"(field {f.name}: {len(text)} hex digits, expected {2 * f.length})")
            try:
                got[f.name] = bytes.fromhex(text)
            except ValueError:
                raise ProtocolError(i, f"(field {f.name} is not hex)") from None
        if pos >= len(lines) or lines[pos].strip():
            raise ProtocolError(i, "(missing blank separator line)")
        pos += 1
        results.append(got)
    if any(x.strip() for x in lines[pos:]):
        raise ProtocolError(len(cases), "(trailing output)")
    return results


def run_kats(binary: Path | str, suite: KatSuite, timeout: float = 60) -> KatOutcome:
    results = execute(binary, suite.schema, suite.cases, timeout)
    passed = failed = 0
    first = None
    for case, got in zip(suite.cases, results):
        bad = None
        for f in suite.outputs:
            if got[f.name] != case.values[f.name]:
                bad = Mismatch(case.count, f.name, case.values[f.name].hex(), got[f.name].hex())
                break
        if bad is None:
            passed += 1
        else:
            failed += 1
            first = first or bad
    return KatOutcome(passed, failed, first)


def draw_inputs(schema: Schema, n_cases: int, seed: int) -> list[KatCase]:
    rng = Xoshiro256(seed)
    return [
        KatCase(i, {f.name: f.draw(rng) for f in schema if f.direction == "in"})
        for i in range(n_cases)
    ]


def gen_kats(
    unit: SourceUnit,
    top_fn: str,
    schema: Schema,
    n_cases: int,
    seed: int,
    toolchain: ToolchainConfig,
    workdir: Path | str,
    headers: Mapping[str, str] | None = None,
    extents: Mapping[str, int] | None = None,
) -> KatSuite:
    if n_cases < 0:
        raise ValueError("n_cases must be >= 0")
    cases = draw_inputs(schema, n_cases, seed)
    res = build_harness(unit.text, top_fn, schema, toolchain, workdir, headers, extents, unit)
    if not res.ok:
        raise VerifyError(f"reference harness does not compile:\n{res.stderr}")
    outputs = execute(res.binary, schema, cases, toolchain.timeout_seconds)
    for c, out in zip(cases, outputs):
        c.values.update(out)
        c.values = {f.name: c.values[f.name] for f in schema}
    return KatSuite(cases, schema, seed)


def flip_bit(suite: KatSuite, case: int, field: str | None = None, bit: int = 0) -> KatSuite:
    """Copy of ``suite`` with one expected-output bit inverted (mutation checks)."""
    field = field or suite.outputs[0].name
    cases = []
    for c in suite.cases:
        values = dict(c.values)
        if c.count == case:
            b = bytearray(values[field])
            b[bit // 8] ^= 1 << (bit % 8)
            values[field] = bytes(b)
        cases.append(KatCase(c.count, values))
    return KatSuite(cases, suite.schema, suite.seed)

