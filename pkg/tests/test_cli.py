from __future__ import annotations

import json

import pytest

from pqc2hls.cli import EXIT_BLOCKERS, EXIT_ERROR, EXIT_OK, main

from conftest import C_DIR, GOLDEN_DIR, REPLAY_DIR


def test_analyze_exit_codes(capsys):
    assert main(["analyze", str(C_DIR / "toy_fft.c")]) == EXIT_BLOCKERS
    assert capsys.readouterr().out == (GOLDEN_DIR / "toy_fft.blockers.txt").read_text()
    assert main(["analyze", str(C_DIR / "clean.c"), "--json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main([]) == EXIT_ERROR
    assert main(["convert", str(tmp_path), "--out", str(tmp_path / "o"), "--runs", "0"]) == EXIT_ERROR
    assert main(["convert", str(tmp_path), "--out", str(tmp_path / "o")]) == EXIT_ERROR
    assert "not a kernel bundle" in capsys.readouterr().err
    assert main(["report", str(tmp_path)]) == EXIT_ERROR
    assert main(["analyze", str(tmp_path / "missing.c")]) == EXIT_ERROR
    assert main(["extract", str(C_DIR / "clean.c"), "--target", "nope", "--out", str(tmp_path / "x")]) == EXIT_ERROR
    assert main(["--version"]) == EXIT_OK


def test_report_on_replay(capsys):
    assert main(["report", str(REPLAY_DIR / "kyber"), "--benchmark", "Kyber-NTT"]) == EXIT_OK
    assert capsys.readouterr().out == (GOLDEN_DIR / "kyber_ntt.table.txt").read_text()


def test_extract_convert_report(tmp_path, capsys):
    bundle, out = tmp_path / "b", tmp_path / "c"
    assert main(["extract", str(C_DIR / "toy_fft.c"), "--target", "fft16", "--kats", "100", "--out", str(bundle)]) == EXIT_OK
    assert "self-test passed" in capsys.readouterr().out
    assert main(["convert", str(bundle), "--runs", "2", "--out", str(out), "--benchmark", "FFT"]) == EXIT_OK
    printed = capsys.readouterr().out
    assert printed.splitlines()[1].startswith("FFT | 100 | ")
    assert (out / "report.txt").read_text() == printed
    assert main(["report", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == printed

    summary = out / "attempts" / "run01" / "summary.json"
    d = json.loads(summary.read_text())
    d["hls_runs"] += 5
    summary.write_text(json.dumps(d))
    assert main(["report", str(out)]) == EXIT_ERROR
    assert "run01" in capsys.readouterr().err


def test_extract_with_no_kats_warns(tmp_path, caplog):
    assert main(["extract", str(C_DIR / "clean.c"), "--target", "xor_block", "--kats", "0", "--out", str(tmp_path)]) == EXIT_OK
    assert "nothing is verified" in caplog.text
