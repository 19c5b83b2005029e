from __future__ import annotations

from pathlib import Path

import pytest

from pqc2hls.config import load_config
from pqc2hls.llm.providers import MockProvider
from pqc2hls.loop.extract import extract_kernel
from pqc2hls.loop.services import services_from_config

FIXTURES = Path(__file__).parent / "fixtures"
C_DIR = FIXTURES / "c"
MOCK_DIR = FIXTURES / "mock"
REPLAY_DIR = FIXTURES / "replay"
REPORTS_DIR = FIXTURES / "reports"
GOLDEN_DIR = FIXTURES / "golden"

SAMPLER_DOMAINS = {
    "ctx_p_ptr": "u64:0:511",
    "ctx_sigma_min": "f64:1.1:1.3",
    "mu": "f64:-8:8",
    "isigma": "f64:0.6:0.8",
}
POINTER_EXTENTS = {"acc": 8, "x": 8, "count": 1}


def c_source(name: str) -> str:
    return (C_DIR / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def config():
    return load_config(None)


@pytest.fixture(scope="session")
def toolchain(config):
    return config.toolchain


@pytest.fixture
def services(config):
    return services_from_config(config, provider=MockProvider({}))


def mock_services(config, script: str | None = None, **overrides):
    cfg = config.with_overrides(**overrides) if overrides else config
    provider = MockProvider.from_file(MOCK_DIR / script) if script else MockProvider({})
    return services_from_config(cfg, provider=provider)


@pytest.fixture(scope="session")
def fft_kernel(tmp_path_factory, toolchain):
    """toy_fft with its full 1000-case suite."""
    wd = tmp_path_factory.mktemp("fft")
    return extract_kernel([C_DIR / "toy_fft.c"], "fft16", 1000, 7, toolchain, wd)


@pytest.fixture(scope="session")
def sampler_kernel(tmp_path_factory, toolchain):
    wd = tmp_path_factory.mktemp("sampler")
    return extract_kernel([C_DIR / "sampler.c"], "sampler", 300, 5, toolchain, wd, domains=SAMPLER_DOMAINS)


@pytest.fixture(scope="session")
def kernel_factory(tmp_path_factory, toolchain):
    cache = {}

    def make(fixture: str, top: str, n: int = 200, **kw):
        key = (fixture, top, n, tuple(sorted(kw.get("extents", {}).items())))
        if key not in cache:
            wd = tmp_path_factory.mktemp(top)
            cache[key] = extract_kernel([C_DIR / fixture], top, n, 3, toolchain, wd, **kw)
        return cache[key]

    return make
