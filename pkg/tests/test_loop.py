from __future__ import annotations

import json

import pytest

from pqc2hls.errors import LoopError, PreprocessExhausted
from pqc2hls.loop import (
    AttemptStore,
    CampaignStats,
    Fail,
    Pass,
    RunTranscript,
    StageRecord,
    convert,
    convert_kernel,
    dse,
    grid,
    load_attempt,
    load_bundle,
    load_campaign,
    loop_sites,
    preprocess,
    run_campaign,
    save_bundle,
)
from pqc2hls.loop.dse import metric_key
from pqc2hls.synth import Objective, PpaMetrics

from conftest import C_DIR, SAMPLER_DOMAINS, mock_services


@pytest.fixture(scope="module")
def fft_ready(fft_kernel, config, tmp_path_factory):
    return preprocess(fft_kernel, mock_services(config), tmp_path_factory.mktemp("pre")).kernel


# -- preprocessing ---------------------------------------------------------

def test_preprocess_removes_math_from_fft(fft_kernel, config, tmp_path):
    res = preprocess(fft_kernel, mock_services(config), tmp_path)
    applied = {s.name: s.provenance for s in res.steps if s.applied}
    assert "remove_runtime_init:init_tw" in applied
    assert "cos" not in res.kernel.code and res.kernel.headers


def test_runtime_malloc_needs_the_model(kernel_factory, config, tmp_path):
    k = kernel_factory("malloc_runtime.c", "prefix_sum")
    with pytest.raises(PreprocessExhausted):
        preprocess(k, mock_services(config), tmp_path / "a")
    svc = mock_services(config, "static_memory.json")
    res = preprocess(k, svc, tmp_path / "b", svc.session("t"))
    step = next(s for s in res.steps if s.name == "map_static_memory")
    assert step.applied and step.provenance.startswith("llm:")
    assert "malloc" not in res.kernel.code


# -- the staged loop -------------------------------------------------------

def test_convert_passes_quickly(fft_ready, config, tmp_path):
    svc = mock_services(config)
    t = convert(fft_ready, svc, tmp_path, svc.session("a"))
    assert isinstance(t.outcome, Pass) and t.iterations <= 3
    assert t.outcome.metrics.area_um2 == 210.0
    t.validate()


def test_broken_model_hits_iteration_cap(fft_kernel, config, tmp_path):
    svc = mock_services(config, "always_broken.json")
    t = convert(fft_kernel, svc, tmp_path, svc.session("a"))
    assert isinstance(t.outcome, Fail)
    assert t.compile_runs == 12 and t.hls_runs == 1
    assert len(t.llm_exchanges) == 11
    t.validate()


@pytest.mark.parametrize("deterministic,script", [(True, None), (False, "flatten_fallback.json")])
def test_sampler_flatten_paths(sampler_kernel, config, tmp_path, deterministic, script):
    svc = mock_services(config, script, loop={"deterministic_transforms": deterministic})
    t, final = convert_kernel(sampler_kernel, svc, tmp_path, svc.session("a"))
    assert isinstance(t.outcome, Pass), t.outcome
    assert "sampler_hls(" in final.code
    assert bool(t.llm_exchanges) is not deterministic


def test_llm_flatten_without_model_fails(sampler_kernel, config, tmp_path):
    svc = mock_services(config, loop={"deterministic_transforms": False, "max_iterations": 2})
    t = convert(sampler_kernel, svc, tmp_path, svc.session("a"))
    assert isinstance(t.outcome, Fail)


# -- transcripts -----------------------------------------------------------

def _rec(kind, digest="d", ok=True):
    return StageRecord(kind, digest, ok, "", "" if ok else "boom")


def test_transcript_invariants():
    t = RunTranscript("run00")
    for k in ("Compile", "KatSim", "HlsSynth"):
        t.add(_rec(k))
    t.validate()
    t.compile_runs = 2
    with pytest.raises(LoopError, match="counters"):
        t.validate()
    early = RunTranscript("run01")
    early.add(_rec("Compile"))
    early.add(_rec("HlsSynth"))
    with pytest.raises(LoopError, match="before passing"):
        early.validate()
    with pytest.raises(ValueError):
        StageRecord("Compile", "d", False, "", "")


def test_store_round_trip(tmp_path):
    store = AttemptStore(tmp_path / "run00")
    t = RunTranscript("run00", outcome=Pass(PpaMetrics(area_um2=1.5, cycle_count=3)), iterations=1)
    for k in ("Compile", "KatSim"):
        r = _rec(k)
        t.add(r)
        store.stage(r)
    store.finish(t)
    back = load_attempt(tmp_path / "run00")
    assert back.summary(False) == t.summary(False) and back.stages == t.stages


# -- DSE -------------------------------------------------------------------

def test_grid_shape(fft_ready):
    sites = loop_sites(fft_ready.code, "fft16")
    assert [(s.index, s.trip) for s in sites] == [(0, 8), (1, 16)]
    plans = grid(sites)
    assert len(plans) == len(set(plans)) == 64
    assert plans[0].directives == ()


def test_dse_picks_the_objective_minimum(fft_ready, config, tmp_path):
    res = dse(fft_ready, mock_services(config), tmp_path, "latency", budget=12)
    assert [c.index for c in res.candidates] == list(range(12))
    viable = [c for c in res.candidates if c.metrics]
    assert res.best.metrics.cycle_count == min(c.metrics.cycle_count for c in viable)
    assert res.best.metrics.cycle_count < 197
    json.dumps(res.to_dict())


def test_fpga_metrics_rank_by_luts():
    m = PpaMetrics(luts=10, cycle_count=5)
    assert metric_key(m, Objective.Area) == (10, 5.0)
    assert metric_key(PpaMetrics(latency_us=2.0), Objective.Latency)[0] == 2.0


# -- campaigns and bundles -------------------------------------------------

def test_campaign_is_deterministic_across_parallelism(fft_kernel, config, tmp_path):
    a = run_campaign(fft_kernel, mock_services(config), tmp_path / "a", 3)
    b = run_campaign(fft_kernel, mock_services(config, campaign={"parallel": 3}), tmp_path / "b", 3)
    sa = [t.summary(False) for t in a.transcripts]
    assert sa == [t.summary(False) for t in b.transcripts]
    assert [t.summary(False) for t in load_campaign(tmp_path / "a")] == sa
    assert a.stats.success == 100.0 and a.stats.area.min == 210.0


def test_stats_ignore_failed_metrics():
    ts = [RunTranscript("run00", compile_runs=2, hls_runs=1, outcome=Pass(PpaMetrics(area_um2=10.0, cycle_count=4))),
          RunTranscript("run01", compile_runs=12, hls_runs=0, outcome=Fail("x"))]
    s = CampaignStats.from_transcripts(ts)
    assert s.success == 50.0 and s.compile_runs.mean == 7.0 and s.area.max == 10.0


def test_bundle_round_trip(sampler_kernel, tmp_path):
    save_bundle(sampler_kernel, tmp_path)
    k = load_bundle(tmp_path)
    assert k == sampler_kernel and k.suite.dumps() == sampler_kernel.suite.dumps()
    (tmp_path / "kernel.json").unlink()
    with pytest.raises(Exception, match="not a kernel bundle"):
        load_bundle(tmp_path)
