"""Deterministic stand-in for an HLS tool's area and latency estimates.

area   = a0 * statements + a1 * sum(unroll factors)        (factor 1 when absent)
cycles = sum(ceil(trip / unroll) * (pipelined ? c_ii * II : c_op * body)) + overhead

Statements and loops are counted over the call closure of the top function.
Unknown trip counts count as one iteration.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

from ..csrc.model import SourceUnit
from ..csrc.slicing import call_closure
from ..xform.pragmas import DEFAULT_DIALECT, PragmaDialect


@dataclass(frozen=True)
class CostModel:
    a0: float = 10.0
    a1: float = 50.0
    c_op: float = 1.0
    c_ii: float = 1.0
    overhead: float = 5.0

    def scaled(self, k: float) -> "CostModel":
        if k <= 0:
            raise ValueError("scale factor must be positive")
        return replace(self, a0=self.a0 * k, a1=self.a1 * k, c_op=self.c_op * k,
                       c_ii=self.c_ii * k, overhead=self.overhead * k)


@dataclass(frozen=True)
class LoopCost:
    function: str
    index: int
    trip: int
    body: int
    unroll: int
    pipeline: int | None


def _template_regex(template: str, key: str) -> re.Pattern:
    head, _, tail = template.partition("{" + key + "}")
    return re.compile(r"^\s*" + re.escape(head).replace(r"\ ", r"\s+") + r"(\d+)" + re.escape(tail) + r"\s*$")


def loop_directives(unit: SourceUnit, dialect: PragmaDialect = DEFAULT_DIALECT) -> dict[tuple[str, int], tuple[int, int | None]]:
    """(function, loop index) -> (unroll factor, pipeline interval) from pragma lines above each loop."""
    unroll_re = _template_regex(dialect.unroll, "factor")
    pipe_re = _template_regex(dialect.pipeline, "interval")
    starts = {t.start: i for i, t in enumerate(unit.tokens)}
    out = {}
    for f in unit.functions:
        for lp in f.loops:
            k = starts.get(lp.span.start)
            unroll, pipe = 1, None
            j = (k or 0) - 1
            while k is not None and j >= 0 and unit.tokens[j].kind in ("pp", "comment"):
                t = unit.tokens[j]
                if t.kind == "pp":
                    if m := unroll_re.match(t.text):
                        unroll = max(1, int(m.group(1)))
                    elif m := pipe_re.match(t.text):
                        pipe = max(1, int(m.group(1)))
                j -= 1
            out[(f.name, lp.index)] = (unroll, pipe)
    return out


def loop_costs(unit: SourceUnit, top: str, dialect: PragmaDialect = DEFAULT_DIALECT) -> list[LoopCost]:
    directives = loop_directives(unit, dialect)
    out = []
    for name in call_closure(unit, top).functions:
        f = unit.function(name)
        for lp in f.loops:
            unroll, pipe = directives[(name, lp.index)]
            out.append(LoopCost(name, lp.index, lp.trip_count or 1, lp.body_statements, unroll, pipe))
    return out


def statement_count(unit: SourceUnit, top: str) -> int:
    return sum(len(unit.function(n).statements) for n in call_closure(unit, top).functions)


def estimate(unit: SourceUnit, top: str, model: CostModel = CostModel(),
             dialect: PragmaDialect = DEFAULT_DIALECT) -> tuple[float, float]:
    """(area, cycles) before rounding."""
    loops = loop_costs(unit, top, dialect)
    area = model.a0 * statement_count(unit, top) + model.a1 * sum(lc.unroll for lc in loops)
    cycles = model.overhead
    for lc in loops:
        iters = math.ceil(lc.trip / lc.unroll)
        cycles += iters * (model.c_ii * lc.pipeline if lc.pipeline else model.c_op * lc.body)
    return area, cycles
