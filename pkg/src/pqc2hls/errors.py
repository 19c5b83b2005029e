"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class Pqc2HlsError(Exception):
    """Base class for every error raised by this package."""


# -- C source model -------------------------------------------------------

class UnsupportedConstruct(Pqc2HlsError):
    def __init__(self, span: tuple[int, int] | None, description: str):
        self.span = span
        self.description = description
        where = f" at {span[0]}..{span[1]}" if span else ""
        super().__init__(f"unsupported construct{where}: {description}")


class UnknownFunction(Pqc2HlsError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown function: {name}")


class UnresolvedDependency(Pqc2HlsError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unresolved dependency: {name}")


# -- transforms -----------------------------------------------------------

class PatchError(Pqc2HlsError):
    pass


class OverlappingSpans(PatchError):
    pass


class SpanOutOfBounds(PatchError):
    pass


class PostPatchParseFailure(PatchError):
    def __init__(self, inner: Exception):
        self.inner = inner
        super().__init__(f"patched text no longer parses: {inner}")


class TransformError(Pqc2HlsError):
    """A deterministic rule cannot handle the input; callers may escalate."""


class NotStaticallySizable(TransformError):
    def __init__(self, span: tuple[int, int], expr: str = ""):
        self.span = span
        super().__init__(f"allocation size is not a literal constant at {span[0]}..{span[1]}: {expr}")


class NotInitFunction(TransformError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"{name} is not an initialization function")


class RunnerBuildFailed(TransformError):
    def __init__(self, stderr: str):
        self.stderr = stderr
        super().__init__(f"runner build failed:\n{stderr}")


class RunnerExecutionFailed(TransformError):
    def __init__(self, status: int | None, detail: str = ""):
        self.status = status
        super().__init__(f"runner exited with status {status} {detail}".rstrip())


class UnboundedField(TransformError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"field extent is not statically known: {name}")


class RecursiveAggregate(TransformError):
    def __init__(self, name: str, limit: int):
        self.name = name
        super().__init__(f"aggregate nesting of {name} exceeds depth limit {limit}")


class FlattenError(TransformError):
    """Aggregate usage the deterministic flattener does not understand."""


class UnknownExtent(TransformError):
    def __init__(self, param: str):
        self.param = param
        super().__init__(f"cannot establish an extent for pointer parameter {param}")


class UnknownLoop(TransformError):
    def __init__(self, function: str, index: int):
        self.function = function
        self.index = index
        super().__init__(f"no loop #{index} in function {function}")


# -- llm ------------------------------------------------------------------

class LlmError(Pqc2HlsError):
    pass


class MissingBinding(LlmError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing binding for placeholder: {name}")


class ProviderUnavailable(LlmError):
    pass


class BudgetExhausted(LlmError):
    pass


class AuthFailure(LlmError):
    pass


class NoCodeFound(LlmError):
    pass


# -- verify ---------------------------------------------------------------

class VerifyError(Pqc2HlsError):
    pass


class ParseError(VerifyError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class SchemaMismatch(VerifyError):
    def __init__(self, case_index: int, reason: str = ""):
        self.case_index = case_index
        super().__init__(f"case {case_index} does not match the schema {reason}".rstrip())


class CompilerNotFound(VerifyError):
    pass


class Timeout(VerifyError):
    pass


class ExecutionFailed(VerifyError):
    def __init__(self, status: int | None, stderr: str = ""):
        self.status = status
        self.stderr = stderr
        super().__init__(f"execution failed with status {status}")


class ProtocolError(VerifyError):
    def __init__(self, case_index: int, reason: str = ""):
        self.case_index = case_index
        super().__init__(f"malformed harness output at case {case_index} {reason}".rstrip())


class SchemaBindingError(VerifyError):
    def __init__(self, param: str, reason: str = ""):
        self.param = param
        super().__init__(f"cannot bind parameter {param} to the KAT schema {reason}".rstrip())


# -- synth ----------------------------------------------------------------

class SynthError(Pqc2HlsError):
    pass


class BackendUnavailable(SynthError):
    pass


class NoMetricsFound(SynthError):
    pass


# -- loop -----------------------------------------------------------------

class LoopError(Pqc2HlsError):
    pass


class KernelSelfTestFailed(LoopError):
    pass


class PreprocessExhausted(LoopError):
    pass


class NoViableCandidate(LoopError):
    pass


class ConfigError(Pqc2HlsError):
    pass
