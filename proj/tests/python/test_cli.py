import json
import os
import subprocess

import pytest

CLI = os.environ.get("CFEVAL_CLI")

pytestmark = pytest.mark.skipif(CLI is None, reason="CFEVAL_CLI not set")


def run(*args, expect=0):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True)
    assert proc.returncode == expect, proc.stderr or proc.stdout
    return proc


def test_generate_fit_evaluate_roundtrip(tmp_path):
    raw = tmp_path / "data.csv"
    scored = tmp_path / "scored.csv"

    out = run("generate", "--n", "20000", "--seed", "7", "--out", str(raw))
    moments = json.loads(out.stdout)
    assert abs(moments["mean_y0"] - 0.40) < 0.03
    assert raw.exists()
    assert (tmp_path / "data.csv.meta.json").exists()
    assert (tmp_path / "data.csv.manifest.json").exists()

    run("fit", "--data", str(raw), "--out", str(scored))
    assert scored.exists()

    out = run("evaluate", "--data", str(scored), "--metric", "mean_y0",
              "--method", "dr", "--positivity", "winsorize")
    est = json.loads(out.stdout)
    assert abs(est["value"] - 0.40) < 3 * est["std_error"] + 0.02
    assert est["kind"] == "dr"


def test_evaluate_reports_errors_as_json(tmp_path):
    raw = tmp_path / "data.csv"
    run("generate", "--n", "2000", "--seed", "3", "--out", str(raw))
    proc = subprocess.run(
        [CLI, "evaluate", "--data", str(raw), "--metric", "mean_y0", "--method", "dr"],
        capture_output=True, text=True)
    assert proc.returncode == 1
    record = json.loads(proc.stderr)
    assert record["error"] == "data_error"


def test_unknown_flag_exits_2():
    proc = subprocess.run([CLI, "generate", "--bogus"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_reproduce_fig2_writes_outputs(tmp_path):
    outdir = tmp_path / "fig2"
    run("reproduce", "fig2", "--outdir", str(outdir), "--n", "6000", "--bootstrap", "20")
    summary = json.loads((outdir / "fig2_summary.json").read_text())
    gaps = summary["checks"]["dr_calibration_closer_than_observational"]
    assert gaps["counterfactual"] is True
    assert gaps["observational"] is True
    assert (outdir / "fig2_curves.csv").exists()
    assert (outdir / "manifest.json").exists()
