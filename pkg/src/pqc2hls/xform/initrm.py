"""Replace runtime table initialization by precomputed constant tables.

The initializer is compiled into a small runner together with its
dependencies, executed once, and its output becomes ``static const``
arrays in a generated header.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from ..blockers import is_init_function
from ..csrc.ctypes import TypeEnv
from ..csrc.lexer import QUALIFIERS, STORAGE
from ..csrc.model import GlobalInfo, SourceUnit, Span
from ..csrc.slicing import extract_slice
from ..errors import (
    NotInitFunction,
    RunnerBuildFailed,
    RunnerExecutionFailed,
    TransformError,
)
from ..verify.toolchain import ToolchainConfig, build, run_process
from ._text import definition_removal, is_call_statement, removal
from .patch import DeterministicRule, Patch

RULE = DeterministicRule("remove_runtime_init")
INT64_MIN = -(1 << 63)


@dataclass(frozen=True)
class ConstTable:
    name: str
    element_type: str
    values: tuple[str, ...]
    length: int
    dims: tuple[str, ...] = ()

    def __post_init__(self):
        if self.length != len(self.values):
            raise ValueError(f"table {self.name}: {len(self.values)} values for length {self.length}")

    def declaration(self) -> str:
        dims = "".join(f"[{d}]" for d in (self.dims or (str(self.length),)))
        rows = []
        for i in range(0, len(self.values), 4):
            rows.append("    " + ", ".join(self.values[i:i + 4]))
        body = ",\n".join(rows)
        return f"static const {self.element_type} {self.name}{dims} = {{\n{body}\n}};\n"


def header_name(stem: str) -> str:
    return f"{stem}_consts.h"


def render_header(stem: str, tables: list[ConstTable]) -> str:
    guard = "".join(c if c.isalnum() else "_" for c in header_name(stem)).upper()
    parts = [f"#ifndef {guard}\n#define {guard}\n\n"]
    for t in tables:
        parts.append(t.declaration())
        parts.append("\n")
    parts.append("#endif\n")
    return "".join(parts)


def _element_type(g: GlobalInfo) -> str:
    words = [w for w in g.base.split() if w not in STORAGE and w not in QUALIFIERS]
    return " ".join(words) + (" " + "*" * g.pointer_depth if g.pointer_depth else "")


def build_runner(unit: SourceUnit, fn: str, tables: list[tuple[GlobalInfo, str, int]], env: TypeEnv) -> str:
    body = [extract_slice(unit, fn), "\n#include <stdio.h>\n\nint main(void)\n{\n", "    long i_;\n",
            f"    {fn}();\n"]
    for g, _, count in tables:
        sc = env.scalar(" ".join(w for w in g.base.split() if w not in STORAGE))
        elem = _element_type(g)
        if g.pointer_depth or sc is None:
            raise TransformError(f"table {g.name} has non-scalar element type {elem}")
        fmt, cast = _format(sc.kind, sc.size)
        body.append(
            f"    for (i_ = 0; i_ < {count}; i_++)\n"
            f"        printf(\"{fmt}\\n\", ({cast})(({elem} *){g.name})[i_]);\n"
        )
    body.append("    return 0;\n}\n")
    return "".join(body)


def _format(kind: str, size: int) -> tuple[str, str]:
    if kind == "f":
        return ("%La", "long double") if size > 8 else ("%a", "double")
    if kind == "u":
        return "%llu", "unsigned long long"
    return "%lld", "long long"


def literal(raw: str, kind: str, size: int) -> str:
    """C literal for one printed value, preserving every bit."""
    raw = raw.strip()
    if kind == "f":
        low = raw.lower()
        if "inf" in low or "nan" in low:
            raise RunnerExecutionFailed(0, f"non-finite table value {raw}")
        if size == 4:
            return raw + "f"
        if size > 8:
            return raw + "L"
        # guard: the text must round-trip to a finite double
        if not math.isfinite(float.fromhex(raw)):
            raise RunnerExecutionFailed(0, f"non-finite table value {raw}")
        return raw
    v = int(raw)
    if kind == "u":
        if v > 0xFFFFFFFF:
            return f"{v}ull"
        if v > 0x7FFFFFFF:
            return f"{v}u"
        return str(v)
    if v == INT64_MIN:
        return "(-9223372036854775807LL - 1)"
    if v > 0x7FFFFFFF or v < -0x80000000:
        return f"{v}LL"
    return str(v)


def remove_runtime_init(
    unit: SourceUnit,
    fn: str,
    toolchain: ToolchainConfig,
    workdir: Path | str,
    stem: str = "kernel",
) -> tuple[Patch, list[ConstTable]]:
    if unit.function(fn) is None:
        # already removed: idempotent no-op
        return Patch.empty(RULE, f"{fn} not present"), []
    check = is_init_function(unit, fn)
    if not check:
        raise NotInitFunction(fn)
    env = TypeEnv(unit)
    specs: list[tuple[GlobalInfo, str, int]] = []
    for name in check.globals_written:
        g = unit.global_(name)
        if g.element_count is None:
            raise TransformError(f"table {name} has no literal extent")
        specs.append((g, _element_type(g), g.element_count))

    # steps 2-3: runner program, built and executed
    workdir = Path(workdir)
    runner = build_runner(unit, fn, specs, env)
    res = build({"runner.c": runner}, toolchain, workdir, output="runner")
    if not res.ok:
        raise RunnerBuildFailed(res.stderr)
    run = run_process([str(res.binary)], toolchain.timeout_seconds, cwd=workdir)
    if run.status != 0:
        raise RunnerExecutionFailed(run.status, run.stderr.strip())
    lines = run.stdout.splitlines()
    total = sum(c for _, _, c in specs)
    if len(lines) != total:
        raise RunnerExecutionFailed(run.status, f"expected {total} values, got {len(lines)}")

    tables: list[ConstTable] = []
    pos = 0
    for g, elem, count in specs:
        sc = env.scalar(" ".join(w for w in g.base.split() if w not in STORAGE))
        values = tuple(literal(x, sc.kind, sc.size) for x in lines[pos:pos + count])
        pos += count
        tables.append(ConstTable(g.name, elem, values, count, g.dims))

    # steps 4-5: drop the initializer and its calls, point the unit at the header
    text = unit.text
    reps: list[tuple[Span, str]] = [definition_removal(text, unit.function(fn).span)]
    for p in unit.prototypes:
        if p.name == fn:
            reps.append(definition_removal(text, p.span))
    for f in unit.functions:
        if f.name == fn:
            continue
        handled: set[int] = set()
        for st in f.statements:
            if is_call_statement(unit, st, fn):
                reps.append(removal(text, st.span, st.parent_control))
                handled.add(st.tok_start)
        for c in f.calls:
            if c.callee == fn and c.name_tok not in handled:
                reps.append((c.span, "((void)0)"))

    hname = header_name(stem)
    table_names = {t.name for t in tables}
    seen_decls: set[Span] = set()
    first = True
    for g, _, _ in sorted(specs, key=lambda s: s[0].span.start):
        if g.span in seen_decls:
            continue
        seen_decls.add(g.span)
        sharing = [x.name for x in unit.globals if x.span == g.span]
        if not set(sharing) <= table_names:
            raise TransformError(f"declaration of {g.name} is shared with non-table globals")
        if first:
            line_start = text.rfind("\n", 0, g.span.start) + 1
            lead = "" if not text[line_start:g.span.start].strip() else "\n"
            reps.append((g.span, f'{lead}#include "{hname}"'))
            first = False
        else:
            reps.append(removal(text, g.span))
    patch = Patch.build(
        reps, RULE, f"replace {fn} with constant tables in {hname}",
        files={hname: render_header(stem, tables)},
    )
    return patch, tables
