"""Per-attempt records and the on-disk transcript store."""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import LoopError
from ..llm.session import LlmExchange
from ..synth.metrics import PpaMetrics

COMPILE, KATSIM, HLS = "Compile", "KatSim", "HlsSynth"
STAGE_KINDS = (COMPILE, KATSIM, HLS)


def code_digest(code: str) -> str:
    return hashlib.sha256(code.encode("utf-8", "surrogateescape")).hexdigest()[:16]


@dataclass(frozen=True)
class StageRecord:
    kind: str
    code_digest: str
    ok: bool
    summary: str
    evidence: str = ""

    def __post_init__(self):
        if self.kind not in STAGE_KINDS:
            raise ValueError(f"unknown stage kind {self.kind}")
        if not self.ok and not self.evidence.strip():
            raise ValueError("failed stage records need evidence")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "code_digest": self.code_digest, "ok": self.ok,
                "summary": self.summary, "evidence": self.evidence}

    @classmethod
    def from_dict(cls, d: dict) -> "StageRecord":
        return cls(d["kind"], d["code_digest"], bool(d["ok"]), d.get("summary", ""), d.get("evidence", ""))


@dataclass(frozen=True)
class Pass:
    metrics: PpaMetrics


@dataclass(frozen=True)
class Fail:
    reason: str
    detail: str = ""


Outcome = Pass | Fail


def check_stage_order(stages: list[StageRecord]) -> Optional[str]:
    """None when every HlsSynth follows a passing Compile and KatSim on the same digest."""
    compiled: set[str] = set()
    simulated: set[str] = set()
    for i, s in enumerate(stages):
        if s.kind == COMPILE and s.ok:
            compiled.add(s.code_digest)
        elif s.kind == KATSIM:
            if s.code_digest not in compiled:
                return f"stage {i}: KatSim of {s.code_digest} without a passing compile"
            if s.ok:
                simulated.add(s.code_digest)
        elif s.kind == HLS and s.code_digest not in simulated:
            return f"stage {i}: HlsSynth of {s.code_digest} before passing Compile+KatSim"
    return None


@dataclass
class RunTranscript:
    attempt_id: str
    stages: list[StageRecord] = field(default_factory=list)
    compile_runs: int = 0
    hls_runs: int = 0
    llm_exchanges: list[str] = field(default_factory=list)
    outcome: Outcome | None = None
    wall_seconds: float = 0.0
    iterations: int = 0
    final_digest: str = ""
    warnings: list[str] = field(default_factory=list)

    def add(self, rec: StageRecord) -> None:
        self.stages.append(rec)
        if rec.kind == COMPILE:
            self.compile_runs += 1
        elif rec.kind == HLS:
            self.hls_runs += 1

    @property
    def passed(self) -> bool:
        return isinstance(self.outcome, Pass)

    def validate(self) -> None:
        n_compile = sum(1 for s in self.stages if s.kind == COMPILE)
        n_hls = sum(1 for s in self.stages if s.kind == HLS)
        if n_compile != self.compile_runs or n_hls != self.hls_runs:
            raise LoopError(
                f"{self.attempt_id}: counters {self.compile_runs}/{self.hls_runs} disagree with "
                f"{n_compile} Compile / {n_hls} HlsSynth records"
            )
        if not self.compile_runs >= self.hls_runs >= 0:
            raise LoopError(f"{self.attempt_id}: compile_runs < hls_runs")
        problem = check_stage_order(self.stages)
        if problem:
            raise LoopError(f"{self.attempt_id}: {problem}")

    def summary(self, with_wall_clock: bool = True) -> dict:
        d = {
            "attempt_id": self.attempt_id,
            "compile_runs": self.compile_runs,
            "hls_runs": self.hls_runs,
            "iterations": self.iterations,
            "llm_exchanges": list(self.llm_exchanges),
            "final_digest": self.final_digest,
            "warnings": list(self.warnings),
        }
        if isinstance(self.outcome, Pass):
            d["outcome"] = {"status": "Pass", "metrics": self.outcome.metrics.to_dict()}
        elif isinstance(self.outcome, Fail):
            d["outcome"] = {"status": "Fail", "reason": self.outcome.reason, "detail": self.outcome.detail}
        else:
            d["outcome"] = None
        if with_wall_clock:
            d["wall_seconds"] = round(self.wall_seconds, 3)
        return d

    @classmethod
    def from_summary(cls, d: dict, stages: list[StageRecord] | None = None) -> "RunTranscript":
        o = d.get("outcome")
        outcome: Outcome | None = None
        if o and o["status"] == "Pass":
            outcome = Pass(PpaMetrics.from_dict(o["metrics"]))
        elif o:
            outcome = Fail(o["reason"], o.get("detail", ""))
        return cls(
            d["attempt_id"], list(stages or []), int(d["compile_runs"]), int(d["hls_runs"]),
            list(d.get("llm_exchanges", [])), outcome, float(d.get("wall_seconds", 0.0)),
            int(d.get("iterations", 0)), d.get("final_digest", ""), list(d.get("warnings", [])),
        )


class AttemptStore:
    """One attempt directory: summary.json, stages.jsonl, exchanges/, code/."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self._lock = threading.Lock()
        (self.root / "exchanges").mkdir(parents=True, exist_ok=True)
        (self.root / "code").mkdir(parents=True, exist_ok=True)

    def stage(self, rec: StageRecord) -> None:
        with self._lock, open(self.root / "stages.jsonl", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")

    def exchange(self, ex: LlmExchange) -> None:
        with self._lock:
            path = self.root / "exchanges" / f"{ex.id}.json"
            path.write_text(json.dumps(ex.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def code(self, code: str, files: dict[str, str] | None = None) -> str:
        digest = code_digest(code)
        path = self.root / "code" / f"{digest}.c"
        with self._lock:
            if not path.exists():
                path.write_text(code, encoding="utf-8", errors="surrogateescape")
            for name, text in (files or {}).items():
                (self.root / "code" / f"{digest}.{name}").write_text(text, encoding="utf-8")
        return digest

    def finish(self, t: RunTranscript) -> None:
        with self._lock:
            (self.root / "summary.json").write_text(
                json.dumps(t.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )


def load_attempt(root: Path) -> RunTranscript:
    root = Path(root)
    summary = json.loads((root / "summary.json").read_text(encoding="utf-8"))
    stages = []
    sp = root / "stages.jsonl"
    if sp.exists():
        for line in sp.read_text(encoding="utf-8").splitlines():
            if line.strip():
                stages.append(StageRecord.from_dict(json.loads(line)))
    return RunTranscript.from_summary(summary, stages)


def attempt_dirs(campaign_dir: Path) -> list[Path]:
    base = Path(campaign_dir)
    attempts = base / "attempts"
    if attempts.is_dir():
        base = attempts
    return sorted(p for p in base.iterdir() if p.is_dir() and (p / "summary.json").exists()) if base.is_dir() else []
