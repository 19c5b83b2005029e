"""Campaign tables and the canonical JSON report document."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .errors import LoopError
from .loop.campaign import CampaignStats, Spread, load_campaign
from .loop.transcript import RunTranscript
from .synth.metrics import PpaMetrics

SCHEMA_VERSION = 1
SEP = " | "
MISSING = "-"
CAMPAIGN_COLUMNS = (
    "Benchmark", "Success (%)",
    "Compile avg", "Compile min", "Compile max",
    "HLS avg", "HLS min", "HLS max",
    "Area avg", "Area min", "Area max",
    "Cycles avg", "Cycles min", "Cycles max",
)
FPGA_COLUMNS = ("Benchmark", "Device", "Freq (MHz)", "CC", "LUT", "FF", "DSP", "BRAM", "Latency (us)")


def fmt(x: float | int | None) -> str:
    """Two decimals, half-up, trailing zeros dropped: 14.2222 -> 14.22, 100.0 -> 100."""
    if x is None:
        return MISSING
    q = Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    s = f"{q:f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _spread(s: Spread | None) -> list[str]:
    return [fmt(s.mean), fmt(s.min), fmt(s.max)] if s is not None else [MISSING] * 3


def campaign_row(benchmark: str, stats: CampaignStats) -> str:
    cells = [benchmark, fmt(stats.success)]
    for s in (stats.compile_runs, stats.hls_runs, stats.area, stats.cycles):
        cells += _spread(s)
    return SEP.join(cells)


def campaign_table(rows: list[tuple[str, CampaignStats]]) -> str:
    lines = [SEP.join(CAMPAIGN_COLUMNS)]
    lines += [campaign_row(b, s) for b, s in rows]
    return "\n".join(lines) + "\n"


def fpga_row(benchmark: str, device: str, m: PpaMetrics) -> str:
    cells = [benchmark, device, fmt(m.freq_mhz), fmt(m.cycle_count), fmt(m.luts), fmt(m.ffs),
             fmt(m.dsps), fmt(m.brams), fmt(m.latency_us)]
    return SEP.join(cells)


def fpga_table(rows: list[tuple[str, str, PpaMetrics]]) -> str:
    return "\n".join([SEP.join(FPGA_COLUMNS), *(fpga_row(*r) for r in rows)]) + "\n"


@dataclass
class ReportDocument:
    benchmark: str
    stats: dict
    attempts: list[dict]
    tools: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def build(cls, benchmark: str, transcripts: list[RunTranscript], tools: dict | None = None,
              config: dict | None = None) -> "ReportDocument":
        return cls(
            benchmark,
            CampaignStats.from_transcripts(transcripts).to_dict(),
            [t.summary(with_wall_clock=False) for t in transcripts],
            dict(tools or {}),
            dict(config or {}),
        )

    def to_dict(self) -> dict:
        return {"schema_version": self.schema_version, "benchmark": self.benchmark, "stats": self.stats,
                "attempts": self.attempts, "tools": self.tools, "config": self.config}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def dump(self, path: Path | str) -> Path:
        path = Path(path)
        path.write_text(self.dumps(), encoding="utf-8")
        return path

    @classmethod
    def from_dict(cls, d: dict) -> "ReportDocument":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise LoopError(f"unsupported report schema version {d.get('schema_version')!r}")
        return cls(d["benchmark"], d["stats"], list(d["attempts"]), dict(d.get("tools", {})),
                   dict(d.get("config", {})), d["schema_version"])

    @classmethod
    def load(cls, path: Path | str) -> "ReportDocument":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def transcripts(self) -> list[RunTranscript]:
        return [RunTranscript.from_summary(a) for a in self.attempts]

    def row(self) -> str:
        return campaign_row(self.benchmark, CampaignStats.from_transcripts(self.transcripts()))


def verify_document(doc: ReportDocument, campaign_dir: Path | str) -> list[str]:
    """Differences between a stored document and the attempt records it claims to summarize."""
    problems: list[str] = []
    transcripts = load_campaign(campaign_dir)
    for t in transcripts:
        try:
            t.validate()
        except LoopError as exc:
            problems.append(f"attempt {t.attempt_id}: {exc}")
    stored = {a["attempt_id"]: a for a in doc.attempts}
    found = {t.attempt_id: t.summary(with_wall_clock=False) for t in transcripts}
    for aid in sorted(set(stored) | set(found)):
        if aid not in found:
            problems.append(f"attempt {aid}: listed in the report but missing on disk")
        elif aid not in stored:
            problems.append(f"attempt {aid}: on disk but missing from the report")
        elif stored[aid] != found[aid]:
            keys = sorted(k for k in set(stored[aid]) | set(found[aid]) if stored[aid].get(k) != found[aid].get(k))
            problems.append(f"attempt {aid}: recorded {', '.join(keys)} differ")
    if CampaignStats.from_transcripts(transcripts).to_dict() != doc.stats:
        problems.append("aggregate statistics differ from the attempt records")
    return problems
