"""Source-to-source transforms, each returning a Patch."""

from .flatten import flatten_aggregates
from .initrm import ConstTable, remove_runtime_init
from .memory import map_static_memory
from .patch import DeterministicRule, LlmExchangeRef, Patch, Replacement, apply, whole_text_patch
from .pointers import pointers_to_arrays
from .pragmas import DEFAULT_DIALECT, Directive, Pipeline, PragmaDialect, PragmaPlan, Unroll, insert_pragmas

__all__ = [
    "ConstTable", "DEFAULT_DIALECT", "DeterministicRule", "Directive", "LlmExchangeRef", "Patch",
    "Pipeline", "PragmaDialect", "PragmaPlan", "Replacement", "Unroll", "apply",
    "flatten_aggregates", "insert_pragmas", "map_static_memory", "pointers_to_arrays",
    "remove_runtime_init", "whole_text_patch",
]
