"""Shared handles for one pipeline invocation: toolchain, backend, LLM provider."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..config import Config
from ..errors import ProviderUnavailable
from ..llm.providers import LiveProvider, MockProvider
from ..llm.session import LlmExchange, LlmSession
from ..synth.backends import ExternalBackend, MockBackend
from ..verify.toolchain import ToolchainConfig


class NoProvider:
    name = "none"

    def complete(self, prompt, settings, cursor) -> str:
        raise ProviderUnavailable("no LLM provider configured (set llm.mock_script or llm.endpoint)")


@dataclass
class Services:
    config: Config
    toolchain: ToolchainConfig
    backend: object
    provider: object

    def session(self, attempt_id: str, sink: Callable[[LlmExchange], None] | None = None) -> LlmSession:
        return LlmSession(self.provider, self.config.llm.settings, self.config.llm.budget, sink, attempt_id)

    @property
    def rejected_categories(self) -> frozenset[str]:
        """Blocker categories the active backend refuses outright."""
        if isinstance(self.backend, MockBackend):
            return frozenset({"DynamicMemory", "MathLibCall", "AggregateInterface"})
        return frozenset()


def make_provider(cfg: Config):
    if cfg.llm.mock_script:
        return MockProvider.from_file(cfg.resolve(cfg.llm.mock_script))
    if cfg.llm.endpoint:
        return LiveProvider(cfg.llm.endpoint, cfg.llm.model, cfg.llm.credential_env, cfg.llm.retries)
    return NoProvider()


def make_backend(cfg: Config):
    if cfg.synth.backend == "mock":
        return MockBackend(cfg.synth.cost, cfg.pragma.dialect)
    return ExternalBackend(cfg.synth.command_template, cfg.synth.timeout_seconds,
                           cfg.synth.report_dialect, cfg.synth.slots)


def services_from_config(cfg: Config, provider=None, backend=None) -> Services:
    return Services(cfg, cfg.toolchain, backend or make_backend(cfg), provider or make_provider(cfg))
