from __future__ import annotations

import json

import pandas as pd
import pytest

from cascadebai.cli import build_parser, main
from cascadebai.harness.config import InstanceSpec
from cascadebai.harness.reports import bounds_report, format_report


# ---------------------------
# bound reports
# ---------------------------

def test_bounds_report_fields(three_items):
    report = bounds_report(three_items)
    assert report["instance"]["k_prime"] == 1
    assert report["regime"] == "KPrimeGe2Km1"
    assert report["terms"]["n3"] is None
    assert report["lower_bound"] > 0
    assert len(report["items"]) == 3
    assert report["observations"]["k"] == [1]


def test_bounds_report_maps_back_to_input_order():
    report = bounds_report(InstanceSpec(K=1, weights=(0.3, 0.9, 0.5)))
    assert [row["input_index"] for row in report["items"]] == [1, 2, 0]
    assert [row["weight"] for row in report["items"]] == [0.9, 0.5, 0.3]


def test_format_report_text_and_json(easy_two_prob):
    report = bounds_report(easy_two_prob)
    text = format_report(report)
    assert "regime: KPrimeLt2Km1" in text
    assert "lower bound:" in text
    parsed = json.loads(format_report(report, "json"))
    assert parsed["instance"]["K"] == 2
    assert parsed["terms"]["total"] == pytest.approx(report["terms"]["total"])


# ---------------------------
# command line
# ---------------------------

def test_parser_knows_every_subcommand():
    parser = build_parser()
    for cmd in ("run", "trials", "bounds", "experiment", "fit"):
        assert parser.parse_args([cmd]).command == cmd


def test_experiment_accepts_paper_scale(tmp_path, capsys):
    argv = [
        "experiment", "--name", "ordering", "--scale", "paper", "--k-grid", "2", "--L", "4",
        "--n", "1", "--max-steps", "2000", "--out", str(tmp_path), "--log-level", "ERROR",
    ]
    assert main(argv) == 0
    assert (tmp_path / "ordering_full_summary.csv").exists()


def test_run_prints_json(capsys):
    assert main(["run", "--weights", "1,0", "--K", "1", "--seed", "3", "--log-level", "WARNING"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["recommended"] == [0]
    assert out["success"] is True
    assert out["algorithm"] == "CascadeBAI"


def test_run_reports_caller_indices(capsys):
    assert main(["run", "--weights", "0,1", "--K", "1", "--seed", "3", "--algo", "batrac", "--log-level", "WARNING"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["recommended"] == [1]
    assert out["algorithm"] == "BatRac(1)"


def test_bounds_command(capsys):
    assert main(["bounds", "--weights", "0.9,0.5,0.3", "--K", "1", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["regime"] == "KPrimeGe2Km1"


def test_bounds_command_with_very_wide_epsilon(capsys):
    assert main(["bounds", "--weights", "0.9,0.5,0.3", "--K", "1", "--eps", "150", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [row["threshold"] for row in out["items"]] == [1, 1, 1]
    assert out["lower_bound"] is None


def test_bad_instance_exits_with_two(capsys):
    assert main(["bounds", "--weights", "0.9,0.5", "--K", "3"]) == 2
    assert "cascadebai: error:" in capsys.readouterr().err


def test_trials_command_writes_csv(tmp_path, capsys):
    out = tmp_path / "t.csv"
    argv = ["trials", "--two-prob", "0.9,0.2", "--L", "4", "--K", "2", "--n", "2", "--seed", "5",
            "--out", str(out), "--log-level", "WARNING"]
    assert main(argv) == 0
    frame = pd.read_csv(out)
    assert frame["trial_id"].tolist() == [0, 1]
    assert "mean_steps" in capsys.readouterr().out


def test_config_file_fills_missing_flags(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"weights": [1.0, 0.0], "K": 1, "seed": 8, "format": "json"}), encoding="utf-8")
    assert main(["run", "--config", str(cfg), "--log-level", "WARNING"]) == 0
    assert json.loads(capsys.readouterr().out)["recommended"] == [0]


def test_unknown_config_key_exits_with_two(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"K": 1, "speed": "fast"}), encoding="utf-8")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "speed" in capsys.readouterr().err


def test_fit_command(tmp_path, capsys):
    src = tmp_path / "summary.csv"
    pd.DataFrame({"K": [4, 8, 12], "mean_steps": [19.0, 31.0, 43.0]}).to_csv(src, index=False)
    dest = tmp_path / "fit.json"
    assert main(["fit", "--model", "linear", "--in", str(src), "--out", str(dest)]) == 0
    fit = json.loads(dest.read_text(encoding="utf-8"))
    assert fit["c1"] == pytest.approx(3.0)
    assert fit["c2"] == pytest.approx(7.0)
    assert json.loads(capsys.readouterr().out)["r_squared"] == pytest.approx(1.0)


def test_fit_accepts_trials_csv(tmp_path, capsys):
    src = tmp_path / "trials.csv"
    pd.DataFrame({"K": [2, 2, 3, 4], "steps": [10, 12, 16, 21]}).to_csv(src, index=False)
    assert main(["fit", "--in", str(src)]) == 0
    assert json.loads(capsys.readouterr().out)["n_points"] == 3


def test_fit_missing_input(tmp_path, capsys):
    assert main(["fit", "--in", str(tmp_path / "nope.csv")]) == 2
    assert main(["fit"]) == 2
