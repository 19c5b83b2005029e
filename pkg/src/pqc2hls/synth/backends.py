"""Synthesis backends: the deterministic mock and an external command wrapper."""

from __future__ import annotations

import shlex
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Protocol, Sequence, Union

from ..blockers import ALLOC_CALLS, MATH_CALLS
from ..csrc.ctypes import TypeEnv
from ..csrc.parser import parse_unit
from ..errors import BackendUnavailable, CompilerNotFound, NoMetricsFound, Pqc2HlsError
from ..verify.toolchain import run_process
from ..xform.pragmas import DEFAULT_DIALECT, PragmaDialect
from .costmodel import CostModel, estimate
from .metrics import PpaMetrics, Success, SynthResult, TimingFailure, ToolError
from .reports import Dialect, parse_report

LOG_NAME = "synth.log"
DESIGN_NAME = "design.c"
TAIL_LINES = 100


class Objective(str, Enum):
    Area = "area"
    Latency = "latency"


class Backend(Protocol):
    name: str

    def synthesize(self, code: str, top: str, objective: Objective, workdir: Path) -> SynthResult: ...


def hls_top(unit, top: str) -> str:
    """The flattened ``<top>_hls`` when present, else ``top``."""
    return f"{top}_hls" if unit.function(f"{top}_hls") is not None else top


def rejection(code: str, top: str, math_calls=MATH_CALLS) -> str | None:
    """Why the mock tool refuses ``code``, or None."""
    try:
        unit = parse_unit(code)
    except Pqc2HlsError as exc:
        return f"unsupported construct: {exc}"
    toks = unit.tokens
    for i, t in enumerate(toks[:-1]):
        if t.kind == "ident" and toks[i + 1].text == "(" and (i == 0 or toks[i - 1].text not in (".", "->")):
            if t.text in ALLOC_CALLS:
                return f"unsupported construct: {t.text}"
            if t.text in math_calls:
                return f"unsupported construct: {t.text}"
    name = hls_top(unit, top)
    f = unit.function(name)
    if f is None:
        return f"top function {name} not found"
    env = TypeEnv(unit)
    for p in f.params:
        r = env.resolve(p.base)
        if p.is_void_pointer or r.struct is not None:
            return f"unsupported construct: aggregate parameter {p.name} of {name}"
    return None


@dataclass
class MockBackend:
    cost: CostModel = field(default_factory=CostModel)
    dialect: PragmaDialect = DEFAULT_DIALECT
    name: str = "mock"

    def synthesize(self, code: str, top: str, objective: Objective, workdir: Path) -> SynthResult:
        workdir = Path(workdir)
        workdir.mkdir(parents=True, exist_ok=True)
        log = workdir / LOG_NAME
        reason = rejection(code, top)
        if reason is not None:
            log.write_text(f"mock synthesis of {top}\nERROR: {reason}\n", encoding="utf-8")
            return SynthResult(ToolError(reason), self.name, log)
        unit = parse_unit(code)
        name = hls_top(unit, top)
        area, cycles = estimate(unit, name, self.cost, self.dialect)
        report = (
            f"mock synthesis of {name} (objective {Objective(objective).value})\n"
            f"mock.area = {area:g}\nmock.cycles = {round(cycles)}\n"
        )
        log.write_text(report, encoding="utf-8")
        return SynthResult(Success(parse_report(report, Dialect.Mock)), self.name, log)


@dataclass
class ExternalBackend:
    """Runs a user command; {code}, {workdir} and {objective} are substituted."""

    command_template: Union[str, Sequence[str]]
    timeout_seconds: float = 3600
    report: Union[Dialect, str, Mapping] = Dialect.AsicReport
    slots: int = 1
    name: str = "external"
    _sem: threading.BoundedSemaphore = field(init=False, repr=False)

    def __post_init__(self):
        self._sem = threading.BoundedSemaphore(max(1, self.slots))

    def argv(self, code_path: Path, workdir: Path, objective: Objective) -> list[str]:
        parts = shlex.split(self.command_template) if isinstance(self.command_template, str) else list(self.command_template)
        subst = {"code": str(code_path), "workdir": str(workdir), "objective": Objective(objective).value}
        return [p.format(**subst) for p in parts]

    def synthesize(self, code: str, top: str, objective: Objective, workdir: Path) -> SynthResult:
        workdir = Path(workdir).resolve()
        workdir.mkdir(parents=True, exist_ok=True)
        code_path = workdir / DESIGN_NAME
        code_path.write_text(code, encoding="utf-8")
        argv = self.argv(code_path, workdir, objective)
        t0 = time.monotonic()
        with self._sem:
            try:
                res = run_process(argv, self.timeout_seconds, cwd=workdir)
            except CompilerNotFound as exc:
                raise BackendUnavailable(str(exc)) from exc
        dt = time.monotonic() - t0
        text = res.stdout + res.stderr
        log = workdir / LOG_NAME
        log.write_text(text, encoding="utf-8")
        tail = "\n".join(text.splitlines()[-TAIL_LINES:])
        if res.status != 0:
            return SynthResult(ToolError(tail or f"exit status {res.status}"), self.name, log, dt)
        if any(line.strip() == "TIMING: FAILED" for line in text.splitlines()):
            return SynthResult(TimingFailure(tail), self.name, log, dt)
        try:
            metrics = parse_report(text, self.report)
        except NoMetricsFound:
            return SynthResult(ToolError(f"no metrics found in report\n{tail}"), self.name, log, dt)
        return SynthResult(Success(metrics), self.name, log, dt)


def synthesize(code: str, backend: Backend, objective: Objective | str, workdir: Path | str, top: str) -> SynthResult:
    return backend.synthesize(code, top, Objective(objective), Path(workdir))


