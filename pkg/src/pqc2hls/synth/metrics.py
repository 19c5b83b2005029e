"""Power/performance/area figures and synthesis outcomes."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Union

from ..errors import SynthError

INT_FIELDS = ("cycle_count", "luts", "ffs", "dsps", "brams")
REAL_FIELDS = ("area_um2", "freq_mhz", "latency_us")


@dataclass(frozen=True)
class PpaMetrics:
    area_um2: Optional[float] = None
    cycle_count: Optional[int] = None
    luts: Optional[int] = None
    ffs: Optional[int] = None
    dsps: Optional[int] = None
    brams: Optional[int] = None
    freq_mhz: Optional[float] = None
    latency_us: Optional[float] = None

    def __post_init__(self):
        present = {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}
        if not present:
            raise SynthError("metrics need at least one field")
        for name, v in present.items():
            if v < 0:
                raise SynthError(f"{name} must be nonnegative, got {v}")
        if self.freq_mhz is not None and self.freq_mhz <= 0:
            raise SynthError("freq_mhz must be positive")
        if not self.consistent():
            warnings.warn(
                f"latency {self.latency_us} us disagrees with {self.cycle_count} cycles at {self.freq_mhz} MHz",
                stacklevel=2,
            )

    def consistent(self) -> bool:
        """latency == cycles / freq within 1% when all three are known."""
        if None in (self.latency_us, self.cycle_count, self.freq_mhz):
            return True
        expect = self.cycle_count / self.freq_mhz
        if expect == 0:
            return self.latency_us == 0
        return abs(self.latency_us - expect) <= 0.01 * expect

    @property
    def is_fpga(self) -> bool:
        return any(getattr(self, n) is not None for n in ("luts", "ffs", "dsps", "brams"))

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "PpaMetrics":
        return cls(**d)


@dataclass(frozen=True)
class Success:
    metrics: PpaMetrics
    kind: str = field(default="Success", init=False)


@dataclass(frozen=True)
class ToolError:
    text: str
    kind: str = field(default="ToolError", init=False)

    def __post_init__(self):
        if not self.text.strip():
            raise SynthError("tool error text must be non-empty")


@dataclass(frozen=True)
class TimingFailure:
    text: str
    kind: str = field(default="TimingFailure", init=False)


Status = Union[Success, ToolError, TimingFailure]


@dataclass(frozen=True)
class SynthResult:
    status: Status
    backend: str
    log_path: Optional[Path] = field(default=None, compare=False)
    duration_seconds: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return isinstance(self.status, Success)

    @property
    def metrics(self) -> PpaMetrics | None:
        return self.status.metrics if isinstance(self.status, Success) else None

    @property
    def evidence(self) -> str:
        return "" if self.ok else self.status.text

    def to_dict(self) -> dict:
        d: dict = {"status": self.status.kind, "backend": self.backend}
        if isinstance(self.status, Success):
            d["metrics"] = self.status.metrics.to_dict()
        else:
            d["text"] = self.status.text
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthResult":
        if d["status"] == "Success":
            status: Status = Success(PpaMetrics.from_dict(d["metrics"]))
        elif d["status"] == "ToolError":
            status = ToolError(d["text"])
        else:
            status = TimingFailure(d["text"])
        return cls(status, d["backend"])
