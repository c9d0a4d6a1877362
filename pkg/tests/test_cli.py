# tests/test_cli.py
import json
import shutil
from pathlib import Path

from typer.testing import CliRunner

from hypdyn.tools.hypdyn_cli import EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, app, tolerance_overrides

TOWERS_DIR = Path(__file__).resolve().parent.parent / "src" / "hypdyn" / "data" / "towers"

runner = CliRunner()


def invoke(*args: str):
    return runner.invoke(app, [str(a) for a in args])


def test_tolerance_overrides():
    assert tolerance_overrides(["--tol-zero", "1e-5", "--tol-monotone-slack=1e-9"]) == {
        "zero": 1e-5, "monotone_slack": 1e-9}


def test_missing_tower_file(tmp_path):
    result = invoke("trace", "--tower", tmp_path / "nope.json", "--out", tmp_path)
    assert result.exit_code == EXIT_USAGE


def test_invalid_tower_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "bad", "surface": {"kind": "disc"}}', encoding="utf-8")
    result = invoke("classify", "--tower", bad, "--out", tmp_path)
    assert result.exit_code == EXIT_USAGE


def test_trace_at_horizon_zero(tmp_path):
    result = invoke("trace", "--tower", TOWERS_DIR / "scaling_half.json", "--horizon", 0, "--out", tmp_path)
    assert result.exit_code == EXIT_OK, result.output
    lines = (tmp_path / "scaling_half_trace.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("n,base_re,base_im,lambda,delta")
    report = json.loads((tmp_path / "scaling_half_trace.json").read_text(encoding="utf-8"))
    assert report["schema"] == "hypdyn/1"
    assert report["result"]["levels"] == 0


def test_classify_rotation(tmp_path):
    result = invoke("classify", "--tower", TOWERS_DIR / "rotation.json", "--horizon", 32, "--samples", 4,
                    "--out", tmp_path)
    assert result.exit_code == EXIT_OK, result.output
    report = json.loads((tmp_path / "rotation_classify.json").read_text(encoding="utf-8"))
    assert report["result"]["row"] == 4
    assert report["settings"]["tolerances"]["zero"] == 1e-6


def test_tolerance_order_is_a_usage_error(tmp_path):
    result = invoke("classify", "--tower", TOWERS_DIR / "rotation.json", "--out", tmp_path, "--tol-zero", "1e-10")
    assert result.exit_code == EXIT_USAGE


def test_unknown_extra_argument(tmp_path):
    result = invoke("trace", "--tower", TOWERS_DIR / "rotation.json", "--out", tmp_path, "--frobnicate")
    assert result.exit_code != EXIT_OK


def test_foliation_of_contracting_tower(tmp_path):
    result = invoke("foliation", "--tower", TOWERS_DIR / "scaling_half.json", "--horizon", 16, "--out", tmp_path)
    assert result.exit_code == EXIT_INCONCLUSIVE


def test_blaschke_levels_below_zero(tmp_path):
    assert invoke("blaschke", "build", "--levels", -1, "--out", tmp_path).exit_code == EXIT_USAGE


def test_blaschke_single_level(tmp_path):
    result = invoke("blaschke", "build", "--levels", 0, "--targets", 20, "--out", tmp_path, "--emit", "json,svg")
    assert result.exit_code == EXIT_OK, result.output
    table = json.loads((tmp_path / "blaschke_regions.json").read_text(encoding="utf-8"))
    assert table["kind"] == "blaschke_regions"
    assert table["levels"][0]["r"] == 0.5
    assert (tmp_path / "blaschke_regions.svg").exists()
    report = json.loads((tmp_path / "blaschke_report.json").read_text(encoding="utf-8"))
    assert all(b["contains_one"] for b in report["result"]["isometry_brackets"])


def test_report_over_a_directory(tmp_path):
    towers = tmp_path / "towers"
    towers.mkdir()
    shutil.copy(TOWERS_DIR / "scaling_half.json", towers)
    result = invoke("report", "--towers", towers, "--horizon", 32, "--out", tmp_path)
    assert result.exit_code == EXIT_OK, result.output
    summary = json.loads((tmp_path / "six_type_report.json").read_text(encoding="utf-8"))
    assert [r["row"] for r in summary["result"]["rows"]] == [1]


def test_report_needs_an_existing_directory(tmp_path):
    assert invoke("report", "--towers", tmp_path / "missing", "--out", tmp_path).exit_code == EXIT_USAGE


def test_recorded_runs_are_listed(tmp_path):
    result = invoke("trace", "--tower", TOWERS_DIR / "rotation.json", "--horizon", 4, "--out", tmp_path, "--record")
    assert result.exit_code == EXIT_OK, result.output
    listed = invoke("runs", "--tower", "rotation")
    assert listed.exit_code == EXIT_OK
    assert "rotation" in listed.output
    assert "No recorded runs" not in listed.output
