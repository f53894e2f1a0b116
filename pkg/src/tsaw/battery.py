"""The acceptance battery: which experiments run, with which settings."""
from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path

from .experiments import ExperimentConfig, TestReport, emit_report, report_json, run_experiment

DEFAULT_SEED = 2026


@dataclass
class Item:
    criterion: int
    label: str
    config: dict
    heavy: bool = False


def items(seed: int = DEFAULT_SEED) -> list[Item]:
    return [
        Item(1, "weights oracles", {"name": "weights_oracles"}),
        Item(2, "eta stationarity", {"name": "eta_stationarity"}),
        Item(3, "route equivalence (0, 2)", {"name": "rk_vs_direct", "j": 0, "r": 2.0}),
        Item(3, "route equivalence (2, 1)", {"name": "rk_vs_direct", "j": 2, "r": 1.0}),
        Item(3, "isolated origin (0, 0.5)", {"name": "rk_vs_direct", "j": 0, "r": 0.5}),
        Item(4, "profile marginal and endpoints", {"name": "profile_to_rbm"}),
        Item(5, "total time", {"name": "t_scaling"}),
        Item(6, "hitting-time tails", {"name": "hitting_tails"}),
        Item(6, "eta convergence and tails", {"name": "eta_convergence"}),
        Item(7, "local limit", {"name": "local_limit"}, heavy=True),
        Item(7, "phi scaling", {"name": "phi_scaling"}, heavy=True),
        Item(8, "null calibration", {"name": "null_calibration"}),
    ]


def config_for(item: Item, seed: int, out: Path | None = None) -> ExperimentConfig:
    d = dict(item.config)
    d["seed"] = seed
    if out is not None:
        d["out"] = str(out)
    return ExperimentConfig.from_dict(d)


def determinism(seed: int = DEFAULT_SEED) -> tuple[bool, str]:
    """Run one small experiment twice into fresh directories and compare report bytes."""
    cfg = {"name": "rk_vs_direct", "j": 1, "r": 1.0, "n": 500}
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        for rep in range(2):
            out = Path(tmp) / f"run{rep}"
            report = run_experiment(ExperimentConfig.from_dict({**cfg, "seed": seed, "out": str(out)}))
            blobs.append(((out / "report.json").read_bytes(), report_json(report).encode()))
    same = blobs[0][0] == blobs[1][0] == blobs[0][1]
    return same, f"{len(blobs[0][0])} bytes"


def run(seed: int = DEFAULT_SEED, quick: bool = False, out: Path | None = None,
        echo=print) -> list[tuple[Item, TestReport | None, bool]]:
    results = []
    for k, item in enumerate(items(seed)):
        if quick and item.heavy:
            continue
        sub = None if out is None else Path(out) / f"{k:02d}_{item.config['name']}"
        report = run_experiment(config_for(item, seed, sub))
        ok = report.passed
        echo(f"{'PASS' if ok else 'FAIL'} criterion {item.criterion}: {item.label}")
        results.append((item, report, ok))
    same, info = determinism(seed)
    echo(f"{'PASS' if same else 'FAIL'} criterion 8: byte-identical reports ({info})")
    results.append((Item(8, "byte-identical reports", {}), None, same))
    return results


__all__ = ["Item", "items", "config_for", "determinism", "run", "emit_report", "DEFAULT_SEED"]
