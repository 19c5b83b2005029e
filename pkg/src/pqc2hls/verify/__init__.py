"""Compilation, KAT suites and harness-based functional verification."""

from .harness import (
    HARNESS_FILE,
    KERNEL_FILE,
    build_harness,
    draw_inputs,
    execute,
    flip_bit,
    gen_harness,
    gen_kats,
    infer_schema,
    run_kats,
)
from .kat import FieldSpec, KatCase, KatOutcome, KatSuite, Mismatch, load_kats, loads, parse_schema
from .rng import Xoshiro256, splitmix64
from .toolchain import BuildSuccess, CompileFailed, ToolchainConfig, build, run_process

__all__ = [
    "BuildSuccess", "CompileFailed", "FieldSpec", "HARNESS_FILE", "KERNEL_FILE", "KatCase", "KatOutcome",
    "KatSuite", "Mismatch", "ToolchainConfig", "Xoshiro256", "build", "build_harness", "draw_inputs",
    "execute", "flip_bit", "gen_harness", "gen_kats", "infer_schema", "load_kats", "loads",
    "parse_schema", "run_kats", "run_process", "splitmix64",
]
