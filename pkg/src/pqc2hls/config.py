"""TOML configuration with documented defaults; unknown keys are rejected."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .llm.settings import LlmSettings
from .synth.costmodel import CostModel
from .verify.toolchain import DEFAULT_COMMAND, DEFAULT_FLAGS, ToolchainConfig
from .xform.pragmas import PragmaDialect

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str = ""
    model: str = "mock"
    credential_env: str = "PQC2HLS_API_KEY"
    mock_script: str = ""
    temperature: float = 0.2
    nucleus: float = 0.2
    max_tokens: int = 4096
    budget: int = 25
    retries: int = 2
    template_dir: str = ""
    stub_dependencies: bool = False

    @property
    def settings(self) -> LlmSettings:
        return LlmSettings(self.temperature, self.nucleus, self.max_tokens, self.model)


@dataclass(frozen=True)
class SynthConfig:
    backend: str = "mock"
    command_template: str = ""
    timeout_seconds: int = 3600
    slots: int = 1
    report_dialect: str = "AsicReport"
    device: str = ""  # label for FPGA report rows
    a0: float = 10.0
    a1: float = 50.0
    c_op: float = 1.0
    c_ii: float = 1.0
    overhead: float = 5.0

    @property
    def cost(self) -> CostModel:
        return CostModel(self.a0, self.a1, self.c_op, self.c_ii, self.overhead)


@dataclass(frozen=True)
class LoopConfig:
    max_iterations: int = 12
    retries_per_step: int = 3
    deterministic_transforms: bool = True
    flatten_depth: int = 4


@dataclass(frozen=True)
class DseConfig:
    budget: int = 64
    llm_proposals: int = 0


@dataclass(frozen=True)
class CampaignConfig:
    parallel: int = 1
    seed: int = 1


@dataclass(frozen=True)
class PragmaConfig:
    unroll: str = "#pragma hls_unroll {factor}"
    pipeline: str = "#pragma hls_pipeline_init_interval {interval}"

    @property
    def dialect(self) -> PragmaDialect:
        return PragmaDialect(self.unroll, self.pipeline)


@dataclass(frozen=True)
class PathsConfig:
    workdir: str = ""
    corpus: str = ""


@dataclass(frozen=True)
class ToolchainSection:
    compiler_command: tuple[str, ...] = DEFAULT_COMMAND
    extra_flags: tuple[str, ...] = DEFAULT_FLAGS
    timeout_seconds: int = 60


@dataclass(frozen=True)
class Config:
    toolchain_section: ToolchainSection = field(default_factory=ToolchainSection)
    llm: LlmConfig = field(default_factory=LlmConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    loop: LoopConfig = field(default_factory=LoopConfig)
    dse: DseConfig = field(default_factory=DseConfig)
    campaign: CampaignConfig = field(default_factory=CampaignConfig)
    pragma: PragmaConfig = field(default_factory=PragmaConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)
    base_dir: str = "."

    @property
    def toolchain(self) -> ToolchainConfig:
        t = self.toolchain_section
        return ToolchainConfig(t.compiler_command, t.extra_flags, t.timeout_seconds)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def snapshot(self) -> dict:
        """Plain dict of every setting (paths relative as written)."""
        out = {}
        for name, sec in _SECTIONS.items():
            obj = getattr(self, sec)
            out[name] = {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
        return out

    def with_overrides(self, **sections: dict[str, Any]) -> "Config":
        cfg = self
        for name, values in sections.items():
            attr = _SECTIONS[name]
            cfg = replace(cfg, **{attr: _build(type(getattr(cfg, attr)), values, name, getattr(cfg, attr))})
        return cfg


_SECTIONS = {
    "toolchain": "toolchain_section", "llm": "llm", "synth": "synth", "loop": "loop", "dse": "dse",
    "campaign": "campaign", "pragma": "pragma", "paths": "paths",
}


def _plain(v: Any) -> Any:
    return list(v) if isinstance(v, tuple) else v


def _coerce(cls, f, value, key: str):
    default = getattr(cls(), f.name)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false")
        return value
    if isinstance(default, tuple):
        if isinstance(value, str):
            import shlex
            value = shlex.split(value)
        if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
            raise ConfigError(f"{key} must be a list of strings")
        return tuple(value)
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a string")
    return value


def _build(cls, values: dict, section: str, base=None):
    if not isinstance(values, dict):
        raise ConfigError(f"[{section}] must be a table")
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for k, v in values.items():
        if k not in known:
            raise ConfigError(f"unknown configuration key: {section}.{k}")
        kwargs[k] = _coerce(cls, known[k], v, f"{section}.{k}")
    return replace(base, **kwargs) if base is not None else cls(**kwargs)


def _validate(cfg: Config) -> Config:
    if cfg.synth.backend not in ("mock", "external"):
        raise ConfigError("synth.backend must be 'mock' or 'external'")
    if cfg.synth.backend == "external" and not cfg.synth.command_template:
        raise ConfigError("synth.command_template is required for the external backend")
    for key, v in (("synth.slots", cfg.synth.slots), ("campaign.parallel", cfg.campaign.parallel),
                   ("loop.max_iterations", cfg.loop.max_iterations), ("dse.budget", cfg.dse.budget)):
        if v < 1:
            raise ConfigError(f"{key} must be >= 1")
    for key, v in (("llm.budget", cfg.llm.budget), ("loop.retries_per_step", cfg.loop.retries_per_step),
                   ("llm.retries", cfg.llm.retries)):
        if v < 0:
            raise ConfigError(f"{key} must be >= 0")
    cfg.llm.settings
    cfg.toolchain
    cfg.pragma.dialect
    return cfg


def config_from_dict(data: dict, base_dir: Path | str = ".") -> Config:
    cfg = Config(base_dir=str(base_dir))
    for name, values in data.items():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown configuration key: {name}")
        attr = _SECTIONS[name]
        cfg = replace(cfg, **{attr: _build(type(getattr(cfg, attr)), values, name)})
    return _validate(cfg)


def load_config(path: Path | str | None) -> Config:
    if path is None:
        return _validate(Config())
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data, path.parent)
