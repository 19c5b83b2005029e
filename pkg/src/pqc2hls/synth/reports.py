"""Parsers for synthesis report text."""

from __future__ import annotations

import re
from enum import Enum
from typing import Mapping, Union

from ..errors import NoMetricsFound
from .metrics import INT_FIELDS, PpaMetrics


class Dialect(str, Enum):
    AsicReport = "AsicReport"
    FpgaReport = "FpgaReport"
    Mock = "Mock"


_NUM = r"([0-9][0-9,]*(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)"
_SEP = r"\s*[:=|]\s*"
_L = r"^\s*\|?\s*"  # optional leading table bar

_ASIC = {
    "area_um2": [rf"{_L}(?:total\s+)?(?:cell\s+)?area(?:\s*\[?\(?(?:um2|µm²|um\^2)\)?\]?)?{_SEP}{_NUM}"],
    "cycle_count": [rf"{_L}(?:cycle\s*count|latency\s*\(?cycles\)?|cycles|cc){_SEP}{_NUM}"],
    "freq_mhz": [rf"{_L}(?:clock\s+)?freq(?:uency)?(?:\s*\(?mhz\)?)?{_SEP}{_NUM}"],
    "latency_us": [rf"{_L}latency\s*\(?(?:us|µs)\)?{_SEP}{_NUM}"],
}

_FPGA = {
    "luts": [rf"{_L}(?:slice\s+)?luts?{_SEP}{_NUM}"],
    "ffs": [rf"{_L}(?:slice\s+)?(?:ffs?|flip[- ]?flops|registers){_SEP}{_NUM}"],
    "dsps": [rf"{_L}dsps?(?:48e1)?s?{_SEP}{_NUM}"],
    "brams": [rf"{_L}(?:block\s+ram|bram)s?(?:\s+tiles?)?{_SEP}{_NUM}"],
    "freq_mhz": _ASIC["freq_mhz"],
    "cycle_count": _ASIC["cycle_count"],
    "latency_us": _ASIC["latency_us"],
}

_MOCK = {
    "area_um2": [rf"^mock\.area{_SEP}{_NUM}"],
    "cycle_count": [rf"^mock\.cycles{_SEP}{_NUM}"],
}

DIALECTS: dict[Dialect, dict[str, list[str]]] = {
    Dialect.AsicReport: _ASIC,
    Dialect.FpgaReport: _FPGA,
    Dialect.Mock: _MOCK,
}

Patterns = Mapping[str, Union[str, list]]


def _compile(patterns: Patterns) -> dict[str, list[re.Pattern]]:
    out = {}
    for name, pats in patterns.items():
        if name not in PpaMetrics.__dataclass_fields__:
            raise ValueError(f"unknown metric {name}")
        pats = [pats] if isinstance(pats, str) else pats
        out[name] = [re.compile(p, re.IGNORECASE) for p in pats]
    return out


def parse_report(text: str, dialect: Dialect | str | Patterns = Dialect.AsicReport) -> PpaMetrics:
    """First match per metric wins; unknown lines are ignored.

    ``dialect`` may also be a mapping of metric name to regex(es) whose first
    group captures the number, for tool grammars supplied through config.
    """
    if isinstance(dialect, Mapping):
        table = _compile(dialect)
    else:
        table = _compile(DIALECTS[Dialect(dialect)])
    found: dict[str, float | int] = {}
    for line in text.splitlines():
        for name, pats in table.items():
            if name in found:
                continue
            for p in pats:
                m = p.search(line)
                if m:
                    raw = m.group(1).replace(",", "")
                    found[name] = int(float(raw)) if name in INT_FIELDS else float(raw)
                    break
    if not found:
        raise NoMetricsFound("no recognizable metric lines")
    return PpaMetrics(**found)
