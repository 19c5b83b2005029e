"""Loop directives for the synthesis tool, one line before each targeted loop."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..csrc.model import SourceUnit, Span
from ..errors import ConfigError, UnknownLoop
from .patch import DeterministicRule, Patch

RULE = DeterministicRule("insert_pragmas")


@dataclass(frozen=True)
class Unroll:
    factor: int

    def __post_init__(self):
        if not isinstance(self.factor, int) or self.factor < 1:
            raise ValueError(f"unroll factor must be >= 1, got {self.factor!r}")

    def __str__(self) -> str:
        return f"unroll({self.factor})"


@dataclass(frozen=True)
class Pipeline:
    interval: int

    def __post_init__(self):
        if not isinstance(self.interval, int) or self.interval < 1:
            raise ValueError(f"pipeline interval must be >= 1, got {self.interval!r}")

    def __str__(self) -> str:
        return f"pipeline({self.interval})"


Action = Union[Unroll, Pipeline]


@dataclass(frozen=True)
class Directive:
    function: str
    loop: int
    action: Action

    def to_dict(self) -> dict:
        if isinstance(self.action, Unroll):
            return {"function": self.function, "loop": self.loop, "unroll": self.action.factor}
        return {"function": self.function, "loop": self.loop, "pipeline": self.action.interval}

    @classmethod
    def from_dict(cls, d: dict) -> "Directive":
        if "unroll" in d:
            action: Action = Unroll(int(d["unroll"]))
        elif "pipeline" in d:
            action = Pipeline(int(d["pipeline"]))
        else:
            raise ValueError(f"directive needs 'unroll' or 'pipeline': {d}")
        return cls(str(d["function"]), int(d["loop"]), action)


@dataclass(frozen=True)
class PragmaPlan:
    directives: tuple[Directive, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "directives", tuple(self.directives))

    @classmethod
    def of(cls, *items: tuple[str, int, Action]) -> "PragmaPlan":
        return cls(tuple(Directive(f, i, a) for f, i, a in items))

    def to_list(self) -> list[dict]:
        return [d.to_dict() for d in self.directives]

    @classmethod
    def from_list(cls, items: list[dict]) -> "PragmaPlan":
        return cls(tuple(Directive.from_dict(d) for d in items))

    def describe(self) -> str:
        if not self.directives:
            return "baseline"
        return ", ".join(f"{d.function}#{d.loop}:{d.action}" for d in self.directives)


@dataclass(frozen=True)
class PragmaDialect:
    unroll: str = "#pragma hls_unroll {factor}"
    pipeline: str = "#pragma hls_pipeline_init_interval {interval}"

    def __post_init__(self):
        if "{factor}" not in self.unroll or "{interval}" not in self.pipeline:
            raise ConfigError("pragma dialect templates need {factor} and {interval}")

    def line(self, action: Action) -> str | None:
        if isinstance(action, Unroll):
            if action.factor == 1:
                return None  # identity
            return self.unroll.format(factor=action.factor)
        return self.pipeline.format(interval=action.interval)


DEFAULT_DIALECT = PragmaDialect()


def insert_pragmas(unit: SourceUnit, plan: PragmaPlan, dialect: PragmaDialect = DEFAULT_DIALECT) -> Patch:
    text = unit.text
    reps: list[tuple[Span, str]] = []
    for d in plan.directives:
        f = unit.function(d.function)
        if f is None or not 0 <= d.loop < len(f.loops):
            raise UnknownLoop(d.function, d.loop)
        line = dialect.line(d.action)
        if line is None:
            continue
        start = f.loops[d.loop].span.start
        line_start = text.rfind("\n", 0, start) + 1
        lead = text[line_start:start]
        # already present on one of the lines directly above
        above = text[:line_start].rstrip("\n").split("\n")[-3:]
        if any(a.strip() == line for a in above):
            continue
        if lead.strip():
            indent = len(lead) - len(lead.lstrip())
            reps.append((Span(start, start), f"\n{lead[:indent]}{line}\n{lead[:indent]}"))
        else:
            reps.append((Span(line_start, line_start), f"{lead}{line}\n"))
    if not reps:
        return Patch.empty(RULE, "no directives")
    return Patch.build(reps, RULE, f"directives: {plan.describe()}")
