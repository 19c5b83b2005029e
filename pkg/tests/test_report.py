from __future__ import annotations

import json
import shutil
from decimal import ROUND_HALF_UP, Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pqc2hls.loop import load_campaign
from pqc2hls.loop.campaign import CampaignStats
from pqc2hls.report import ReportDocument, campaign_row, campaign_table, fmt, fpga_row, verify_document
from pqc2hls.synth import Dialect, parse_report

from conftest import GOLDEN_DIR, REPLAY_DIR, REPORTS_DIR


@pytest.mark.parametrize("x,s", [
    (None, "-"), (100.0, "100"), (14.2222, "14.22"), (2.675, "2.68"), (0.005, "0.01"),
    (51.8, "51.8"), (0, "0"), (-0.001, "0"), (1e-7, "0"), (5639, "5639"),
])
def test_fmt_examples(x, s):
    assert fmt(x) == s


@given(st.integers(-10**9, 10**9))
def test_fmt_integers_unchanged(n):
    assert fmt(n) == str(n)


@given(st.integers(0, 10**8))
def test_fmt_parses_back_to_two_decimal_rounding(cents):
    x = cents / 1000
    expect = Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    assert Decimal(fmt(x)) == expect
    assert not fmt(x).endswith(".0") and fmt(x).count(".") <= 1


@pytest.mark.parametrize("name,bench", [("kyber", "Kyber-NTT"), ("falcon", "Falcon-NTT")])
def test_replay_rows_match_golden(name, bench):
    stats = CampaignStats.from_transcripts(load_campaign(REPLAY_DIR / name))
    golden = (GOLDEN_DIR / f"{name}_ntt.table.txt").read_text()
    assert campaign_table([(bench, stats)]) == golden


def test_fpga_row():
    m = parse_report((REPORTS_DIR / "kyber_ntt_fpga.rpt").read_text(), Dialect.FpgaReport)
    assert fpga_row("Kyber-NTT", "xc7a100t", m) == "Kyber-NTT | xc7a100t | 75 | 5639 | 146 | 119 | 3 | 1 | 75"


def test_document_round_trip_and_verification(tmp_path):
    root = tmp_path / "falcon"
    shutil.copytree(REPLAY_DIR / "falcon", root)
    doc = ReportDocument.build("Falcon-NTT", load_campaign(root), {"version": "x"}, {"loop": {}})
    again = ReportDocument.from_dict(json.loads(doc.dumps()))
    assert again.dumps() == doc.dumps()
    assert again.row() == campaign_row("Falcon-NTT", CampaignStats.from_transcripts(load_campaign(root)))
    assert verify_document(doc, root) == []

    summary = root / "attempts" / "run03" / "summary.json"
    d = json.loads(summary.read_text())
    d["compile_runs"] += 1
    summary.write_text(json.dumps(d))
    problems = verify_document(doc, root)
    assert any(p.startswith("attempt run03") for p in problems)
    assert "aggregate statistics differ from the attempt records" in problems


def test_unknown_schema_version():
    with pytest.raises(Exception, match="schema version"):
        ReportDocument.from_dict({"schema_version": 99, "benchmark": "x", "stats": {}, "attempts": []})
