"""Scaling measurements: counter fits, slope arithmetic, and the
machine-readable entry point."""

import json
import subprocess
import sys

from chrg.bench import DEFAULT_SIZES, loglog_slope, run_one, series


def test_loglog_slope_recovers_known_exponents():
    lin = [{"n": n, "seconds": 3.0 * n} for n in (8, 16, 32, 64)]
    assert abs(loglog_slope(lin) - 1.0) < 1e-9
    cubic = [{"n": n, "seconds": 0.5 * n ** 3} for n in (8, 16, 32, 64)]
    assert abs(loglog_slope(cubic) - 3.0) < 1e-9


def test_counter_series_counts_are_linear():
    runs = series("counter", sizes=(16, 32, 64))
    for r in runs:
        assert r["applications"] == 2 * r["n"] - 1
        assert r["created"] == 2 * r["n"] - 1
    assert abs(loglog_slope(runs, y="applications") - 1.0) < 0.02


def test_run_one_fields():
    r = run_one("ambiguous", 8)
    assert r["grammar"] == "ambiguous" and r["n"] == 8
    assert r["applications"] > 0 and r["created"] > 0
    assert r["seconds"] > 0
    assert r["kernel"] in ("pure", "compiled")


def test_default_sizes_cover_all_grammars():
    assert set(DEFAULT_SIZES) == {"counter", "ambiguous", "blowup"}


def test_bench_cli_json():
    out = subprocess.run(
        [sys.executable, "-m", "chrg.bench", "--grammar", "counter",
         "--sizes", "8,16,32", "--json"],
        capture_output=True, text=True, check=True)
    report = json.loads(out.stdout)
    assert [r["n"] for r in report["runs"]] == [8, 16, 32]
    assert report["slope"] is not None
    assert report["kernel"] in ("pure", "compiled")
