from __future__ import annotations

import stat
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqc2hls.csrc import parse_unit
from pqc2hls.errors import BackendUnavailable, NoMetricsFound, SynthError
from pqc2hls.synth import (
    CostModel,
    Dialect,
    ExternalBackend,
    MockBackend,
    Objective,
    PpaMetrics,
    SynthResult,
    estimate,
    parse_report,
    rejection,
)
from pqc2hls.xform.patch import apply
from pqc2hls.xform.pragmas import Directive, Pipeline, PragmaPlan, Unroll, insert_pragmas

from conftest import REPORTS_DIR, c_source


# -- metrics ---------------------------------------------------------------

def test_metrics_validation():
    with pytest.raises(SynthError):
        PpaMetrics()
    with pytest.raises(SynthError):
        PpaMetrics(area_um2=-1.0)
    with pytest.raises(SynthError):
        PpaMetrics(freq_mhz=0.0)
    with pytest.warns(UserWarning):
        PpaMetrics(cycle_count=100, freq_mhz=100.0, latency_us=5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        PpaMetrics(cycle_count=5639, freq_mhz=75.0, latency_us=75.0)


@given(st.builds(PpaMetrics, area_um2=st.floats(0, 1e9), cycle_count=st.integers(0, 10**9) | st.none()))
def test_result_dict_round_trip(m):
    from pqc2hls.synth import Success
    r = SynthResult(Success(m), "mock")
    assert SynthResult.from_dict(r.to_dict()) == r


# -- reports ---------------------------------------------------------------

def test_fpga_report():
    m = parse_report((REPORTS_DIR / "kyber_ntt_fpga.rpt").read_text(), Dialect.FpgaReport)
    assert (m.luts, m.ffs, m.dsps, m.brams) == (146, 119, 3, 1)
    assert (m.freq_mhz, m.cycle_count, m.latency_us) == (75.0, 5639, 75.0)
    assert m.is_fpga


def test_asic_report():
    m = parse_report((REPORTS_DIR / "kyber_ntt_asic.rpt").read_text(), "AsicReport")
    assert m.area_um2 == 2957.54 and m.cycle_count == 52 and not m.is_fpga


@pytest.mark.parametrize("text", ["", "\n\n", "synthesis finished\nno numbers here\n"])
def test_empty_report_raises(text):
    with pytest.raises(NoMetricsFound):
        parse_report(text)


def test_custom_grammar():
    m = parse_report("gates: 1,234\nticks -> 99\n", {"area_um2": r"^gates:\s*([\d,]+)", "cycle_count": [r"ticks -> (\d+)"]})
    assert (m.area_um2, m.cycle_count) == (1234.0, 99)
    with pytest.raises(ValueError):
        parse_report("x", {"bogus": "(1)"})


@settings(max_examples=50)
@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=300),
       st.integers(0, 10**7), st.integers(0, 10**6))
def test_report_noise_does_not_hide_metrics(noise, area_cents, cycles):
    area = area_cents / 100
    noise = "\n".join(l for l in noise.splitlines() if not any(c.isdigit() for c in l))
    text = f"{noise}\nTotal Area: {area:.2f}\nCycle count: {cycles}\n{noise}\n"
    m = parse_report(text)
    assert m.area_um2 == pytest.approx(area) and m.cycle_count == cycles


# -- cost model and mock tool ---------------------------------------------

def test_toy_fft_costs():
    unit = parse_unit(c_source("toy_fft.c"))
    assert estimate(unit, "fft16") == (210.0, 197.0)
    plan = PragmaPlan((Directive("fft16", 0, Pipeline(1)), Directive("fft16", 1, Pipeline(1))))
    piped = apply(unit, insert_pragmas(unit, plan)).text
    assert estimate(parse_unit(piped), "fft16") == (210.0, 29.0)


@given(st.floats(0.01, 100))
def test_scaled_model_scales_both_axes(k):
    unit = parse_unit(c_source("toy_fft.c"))
    a, c = estimate(unit, "fft16")
    ka, kc = estimate(unit, "fft16", CostModel().scaled(k))
    assert ka == pytest.approx(a * k) and kc == pytest.approx(c * k)


def test_scale_must_be_positive():
    with pytest.raises(ValueError):
        CostModel().scaled(0)


def test_unroll_trades_area_for_cycles():
    unit = parse_unit(c_source("toy_fft.c"))
    plan = PragmaPlan((Directive("fft16", 1, Unroll(4)),))
    a, c = estimate(parse_unit(apply(unit, insert_pragmas(unit, plan)).text), "fft16")
    assert a > 210 and c < 197


@pytest.mark.parametrize("fixture,top,reason", [
    ("malloc_const.c", "poly_scale", "malloc"),
    ("pair_struct.c", "pair_mix", "aggregate parameter"),
    ("toy_fft.c", "fft16", "cos"),
    ("clean.c", "nope", "not found"),
])
def test_mock_tool_rejections(fixture, top, reason):
    assert reason in rejection(c_source(fixture), top)


def test_mock_backend_writes_log(tmp_path):
    code = c_source("clean.c")
    r = MockBackend().synthesize(code, "xor_block", Objective.Area, tmp_path)
    area, cycles = estimate(parse_unit(code), "xor_block")
    assert r.ok and r.metrics == PpaMetrics(area_um2=area, cycle_count=round(cycles))
    assert f"mock.area = {area:g}" in r.log_path.read_text()
    bad = MockBackend().synthesize(c_source("malloc_const.c"), "poly_scale", Objective.Area, tmp_path)
    assert not bad.ok and "malloc" in bad.evidence


# -- external tool ---------------------------------------------------------

def _script(tmp_path, body: str):
    p = tmp_path / "tool.sh"
    p.write_text("#!/bin/sh\n" + body)
    p.chmod(p.stat().st_mode | stat.S_IEXEC)
    return str(p)


def test_external_success_and_substitution(tmp_path):
    tool = _script(tmp_path, 'test -f "$1" || exit 9\necho "objective $2"\ncat ' + str(REPORTS_DIR / "kyber_ntt_asic.rpt") + "\n")
    r = ExternalBackend(f"{tool} {{code}} {{objective}}").synthesize("int f(void){return 0;}\n", "f", Objective.Latency, tmp_path / "w")
    assert r.ok and r.metrics.area_um2 == 2957.54
    assert "objective latency" in r.log_path.read_text()


def test_external_failures(tmp_path):
    code = "int f(void){return 0;}\n"
    r = ExternalBackend(_script(tmp_path, "echo 'ERROR: bad pragma' >&2\nexit 1\n")).synthesize(code, "f", Objective.Area, tmp_path / "a")
    assert type(r.status).__name__ == "ToolError" and "bad pragma" in r.evidence
    r = ExternalBackend(_script(tmp_path, "echo 'Total Area: 5'\necho 'TIMING: FAILED'\n")).synthesize(code, "f", Objective.Area, tmp_path / "b")
    assert type(r.status).__name__ == "TimingFailure"
    r = ExternalBackend(_script(tmp_path, "echo done\n")).synthesize(code, "f", Objective.Area, tmp_path / "c")
    assert not r.ok and "no metrics" in r.evidence
    with pytest.raises(BackendUnavailable):
        ExternalBackend("no-such-hls-tool-xyz {code}").synthesize(code, "f", Objective.Area, tmp_path / "d")
