import csv
import json
import subprocess
import sys

import pytest

from tsaw.cli import main
from tsaw.errors import ConfigError
from tsaw.experiments import (EXPERIMENTS, ExperimentConfig, emit_report, report_json,
                              run_experiment)


def test_unknown_experiment():
    with pytest.raises(ConfigError):
        ExperimentConfig(name="nope")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"name": "rk_vs_direct", "colour": "red"})


@pytest.mark.parametrize("bad", [{"n": 0}, {"s": -1.0}, {"dy": 0.0}, {"h": -0.5}, {"A": [0]},
                                 {"model": {"kind": "cubic"}}])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"name": "eta_stationarity", **bad})


def test_eta_stationarity_report(tmp_path):
    cfg = ExperimentConfig(name="eta_stationarity", n=2000, seed=3, out=str(tmp_path))
    rep = run_experiment(cfg)
    names = [c.name for c in rep.checks]
    assert names == ["eta_vs_rho_ks"]
    assert 0 <= rep.checks[0].statistic <= 1 and rep.checks[0].p_value is not None
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["seed"] == 3 and data["config"]["n"] == 2000
    assert "wall_clock" not in (tmp_path / "report.json").read_text()
    assert "wall_clock_seconds" in json.loads((tmp_path / "timing.json").read_text())
    rows = list(csv.reader(open(tmp_path / "checks.csv")))
    assert rows[0] == ["experiment", "check", "statistic", "threshold", "rule", "p_value", "passed"]


def test_rk_vs_direct_report_and_determinism(tmp_path):
    cfg = dict(name="rk_vs_direct", j=0, r=0.5, n=600, seed=11)
    a = run_experiment(ExperimentConfig.from_dict({**cfg, "out": str(tmp_path / "a")}))
    b = run_experiment(ExperimentConfig.from_dict({**cfg, "out": str(tmp_path / "b")}))
    names = {c.name for c in a.checks}
    assert {f"site_{k}_ks" for k in (-2, -1, 1, 2, 3)} <= names
    assert {"left_end_ks", "right_end_ks", "total_time_ks", "alone_direct_abs_z"} <= names
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    assert report_json(a) == report_json(b)
    # Bonferroni: every p-value check shares alpha / m
    pchecks = [c for c in a.checks if c.rule == "p>="]
    assert all(c.threshold == pytest.approx(1e-3 / len(pchecks)) for c in pchecks)


def test_emit_report_formats(tmp_path):
    rep = run_experiment(ExperimentConfig(name="weights_oracles"))
    paths = emit_report(rep, tmp_path, formats=("json",))
    assert (tmp_path / "report.json") in paths and not (tmp_path / "checks.csv").exists()
    assert rep.passed


def test_failed_check_gives_nonzero_exit(tmp_path):
    # a far-too-short run cannot look stationary
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 5000, "params": {"t": 0.05}}))
    code = main(["run", "eta_stationarity", "--config", str(cfg), "--seed", "1", "--out", str(tmp_path / "o")])
    assert code == 1
    assert json.loads((tmp_path / "o" / "report.json").read_text())["passed"] is False


def test_cli_run_and_list(tmp_path, capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in EXPERIMENTS)
    assert main(["run", "weights_oracles", "--out", str(tmp_path)]) == 0
    assert "PASS weights_oracles.Z_step_abs_error" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": -3}))
    assert main(["run", "eta_stationarity", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "tsaw.cli", "list"], capture_output=True, text=True)
    assert res.returncode == 0 and "rk_vs_direct" in res.stdout
