"""External C compiler and process execution with hard timeouts."""

from __future__ import annotations

import os
import signal
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from ..errors import CompilerNotFound, ConfigError, Timeout

DEFAULT_COMMAND = ("cc", "-std=c99", "{sources}", "-o", "{output}", "-lm")
DEFAULT_FLAGS = ("-O1", "-fno-builtin")


@dataclass(frozen=True)
class ToolchainConfig:
    compiler_command: tuple[str, ...] = DEFAULT_COMMAND
    extra_flags: tuple[str, ...] = DEFAULT_FLAGS
    timeout_seconds: int = 60

    def __post_init__(self):
        cmd = tuple(self.compiler_command)
        object.__setattr__(self, "compiler_command", cmd)
        object.__setattr__(self, "extra_flags", tuple(self.extra_flags))
        if not cmd:
            raise ConfigError("toolchain.compiler_command is empty")
        if not any("{sources}" in a for a in cmd) or not any("{output}" in a for a in cmd):
            raise ConfigError("toolchain.compiler_command needs {sources} and {output} placeholders")
        if not isinstance(self.timeout_seconds, (int, float)) or self.timeout_seconds <= 0:
            raise ConfigError("toolchain.timeout_seconds must be positive")

    def argv(self, sources: Sequence[str], output: str) -> list[str]:
        out = [self.compiler_command[0], *self.extra_flags]
        for arg in self.compiler_command[1:]:
            if arg == "{sources}":
                out.extend(sources)
            else:
                out.append(arg.replace("{output}", output).replace("{sources}", " ".join(sources)))
        return out


@dataclass(frozen=True)
class BuildSuccess:
    binary: Path
    stderr: str
    command: tuple[str, ...]
    ok: bool = field(default=True, init=False)


@dataclass(frozen=True)
class CompileFailed:
    stderr: str
    status: int
    command: tuple[str, ...]
    ok: bool = field(default=False, init=False)


BuildResult = BuildSuccess | CompileFailed


@dataclass(frozen=True)
class ProcessResult:
    status: int
    stdout: str
    stderr: str


def run_process(
    argv: Sequence[str],
    timeout: float,
    cwd: Path | str | None = None,
    stdin: str | None = None,
) -> ProcessResult:
    """Run in its own session so a timeout kills the whole process group."""
    try:
        proc = subprocess.Popen(
            list(argv), cwd=cwd, stdin=subprocess.PIPE if stdin is not None else subprocess.DEVNULL,
            stdout=subprocess.PIPE, stderr=subprocess.PIPE, start_new_session=True,
            text=True, errors="replace",
        )
    except FileNotFoundError as exc:
        raise CompilerNotFound(f"executable not found: {argv[0]}") from exc
    except PermissionError as exc:
        raise CompilerNotFound(f"executable not runnable: {argv[0]}") from exc
    try:
        out, err = proc.communicate(stdin, timeout=timeout)
    except subprocess.TimeoutExpired:
        _kill(proc)
        raise Timeout(f"{argv[0]} exceeded {timeout} s") from None
    except BaseException:
        _kill(proc)
        raise
    return ProcessResult(proc.returncode, out, err)


def _kill(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass
    proc.communicate()


def write_sources(
    sources: Sequence[str] | Mapping[str, str], workdir: Path, headers: Mapping[str, str] | None = None
) -> list[str]:
    workdir.mkdir(parents=True, exist_ok=True)
    if isinstance(sources, Mapping):
        named = list(sources.items())
    else:
        named = [(f"src{i}.c", s) for i, s in enumerate(sources)]
    for name, text in list(named) + list((headers or {}).items()):
        (workdir / name).write_text(text, encoding="utf-8", errors="surrogateescape")
    return [name for name, _ in named]


def build(
    sources: Sequence[str] | Mapping[str, str],
    toolchain: ToolchainConfig,
    workdir: Path | str,
    headers: Mapping[str, str] | None = None,
    output: str = "prog",
) -> BuildResult:
    workdir = Path(workdir)
    names = write_sources(sources, workdir, headers)
    argv = toolchain.argv(names, output)
    res = run_process(argv, toolchain.timeout_seconds, cwd=workdir)
    if res.status != 0:
        return CompileFailed(res.stderr, res.status, tuple(argv))
    return BuildSuccess((workdir / output).resolve(), res.stderr, tuple(argv))
