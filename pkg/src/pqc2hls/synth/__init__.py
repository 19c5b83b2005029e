"""Synthesis backends, report parsing and the mock cost model."""

from .backends import ExternalBackend, MockBackend, Objective, hls_top, rejection, synthesize
from .costmodel import CostModel, estimate, loop_costs
from .metrics import PpaMetrics, Success, SynthResult, TimingFailure, ToolError
from .reports import Dialect, parse_report

__all__ = [
    "CostModel", "Dialect", "ExternalBackend", "MockBackend", "Objective", "PpaMetrics", "Success",
    "SynthResult", "TimingFailure", "ToolError", "estimate", "hls_top", "loop_costs", "parse_report",
    "rejection", "synthesize",
]
