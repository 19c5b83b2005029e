"""Repeated independent conversion attempts and their aggregate statistics."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..errors import ConfigError, PreprocessExhausted
from ..synth.backends import Objective
from .convert import convert_kernel
from .dse import DseResult, dse
from .kernel import Kernel
from .preprocess import preprocess
from .services import Services
from .transcript import AttemptStore, Fail, Pass, RunTranscript, attempt_dirs, load_attempt

ATTEMPTS_DIR = "attempts"


def attempt_id(index: int) -> str:
    return f"run{index:02d}"


@dataclass(frozen=True)
class Spread:
    mean: float
    min: float
    max: float

    @classmethod
    def of(cls, values: Iterable[float]) -> "Spread | None":
        xs = list(values)
        if not xs:
            return None
        return cls(math.fsum(xs) / len(xs), min(xs), max(xs))

    def to_dict(self) -> dict:
        return {"mean": self.mean, "min": self.min, "max": self.max}


@dataclass(frozen=True)
class CampaignStats:
    """Counters over every attempt; area and cycles over passing attempts only."""

    runs: int
    passes: int
    compile_runs: Spread | None
    hls_runs: Spread | None
    area: Spread | None
    cycles: Spread | None

    @property
    def success(self) -> float:
        return 100.0 * self.passes / self.runs if self.runs else 0.0

    @classmethod
    def from_transcripts(cls, transcripts: list[RunTranscript]) -> "CampaignStats":
        passing = [t.outcome.metrics for t in transcripts if isinstance(t.outcome, Pass)]
        return cls(
            runs=len(transcripts),
            passes=len(passing),
            compile_runs=Spread.of(t.compile_runs for t in transcripts),
            hls_runs=Spread.of(t.hls_runs for t in transcripts),
            area=Spread.of(m.area_um2 for m in passing if m.area_um2 is not None),
            cycles=Spread.of(m.cycle_count for m in passing if m.cycle_count is not None),
        )

    def to_dict(self) -> dict:
        def s(x: Spread | None):
            return x.to_dict() if x is not None else None

        return {"runs": self.runs, "passes": self.passes, "success": self.success,
                "compile_runs": s(self.compile_runs), "hls_runs": s(self.hls_runs),
                "area": s(self.area), "cycles": s(self.cycles)}


@dataclass
class AttemptResult:
    transcript: RunTranscript
    kernel: Kernel | None = None
    dse: DseResult | None = None


@dataclass
class CampaignResult:
    root: Path
    attempts: list[AttemptResult] = field(default_factory=list)

    @property
    def transcripts(self) -> list[RunTranscript]:
        return [a.transcript for a in self.attempts]

    @property
    def stats(self) -> CampaignStats:
        return CampaignStats.from_transcripts(self.transcripts)


def run_attempt(
    index: int,
    kernel: Kernel,
    services: Services,
    root: Path | str,
    objective: Objective | str = Objective.Area,
    with_dse: bool = False,
) -> AttemptResult:
    """One isolated attempt: preprocess, convert, then optionally explore pragmas."""
    aid = attempt_id(index)
    workdir = Path(root) / ATTEMPTS_DIR / aid
    store = AttemptStore(workdir)
    session = services.session(aid, store.exchange)
    t = RunTranscript(aid)
    t0 = time.monotonic()
    try:
        pre = preprocess(kernel, services, workdir / "work" / "pre", session, t, store)
    except PreprocessExhausted as exc:
        t.outcome = Fail("preprocess exhausted", str(exc))
        t.llm_exchanges = [x.id for x in session.exchanges]
        t.wall_seconds = time.monotonic() - t0
        store.finish(t)
        return AttemptResult(t)
    t, final = convert_kernel(pre.kernel, services, workdir / "work" / "convert", session, objective, t, store)
    t.wall_seconds = time.monotonic() - t0
    store.finish(t)
    result = AttemptResult(t, final)
    if final is not None and with_dse:
        result.dse = dse(final, services, workdir / "work" / "dse", objective, session)
        (workdir / "dse.json").write_text(
            json.dumps(result.dse.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return result


def run_campaign(
    kernel: Kernel,
    services: Services,
    root: Path | str,
    runs: int,
    objective: Objective | str = Objective.Area,
    with_dse: bool = False,
) -> CampaignResult:
    if runs < 1:
        raise ConfigError("a campaign needs at least one run")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    parallel = max(1, services.config.campaign.parallel)
    pool = ThreadPoolExecutor(max_workers=parallel)
    futures = [pool.submit(run_attempt, i, kernel, services, root, objective, with_dse) for i in range(runs)]
    try:
        attempts = [f.result() for f in futures]
    except BaseException:
        # Ctrl-C: drop queued attempts; finished ones already wrote their summaries
        pool.shutdown(wait=False, cancel_futures=True)
        raise
    pool.shutdown()
    return CampaignResult(root, attempts)


def load_campaign(root: Path | str) -> list[RunTranscript]:
    """Transcripts of a campaign (or replay) directory in attempt-id order."""
    return [load_attempt(d) for d in attempt_dirs(Path(root))]
