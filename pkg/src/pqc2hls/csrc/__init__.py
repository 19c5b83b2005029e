"""Lexical-structural model of C translation units."""

from .ctypes import Scalar, TypeEnv
from .model import (
    CallEdge,
    FunctionInfo,
    GlobalInfo,
    Include,
    LoopInfo,
    ParamInfo,
    SourceUnit,
    Span,
)
from .parser import parse_unit, render, render_bytes
from .slicing import LIBC_EXTERNALS, Closure, call_closure, extract_slice

__all__ = [
    "CallEdge", "Closure", "FunctionInfo", "GlobalInfo", "Include", "LIBC_EXTERNALS",
    "LoopInfo", "ParamInfo", "Scalar", "SourceUnit", "Span", "TypeEnv",
    "call_closure", "extract_slice", "parse_unit", "render", "render_bytes",
]
