"""Acceptance battery: one test per criterion, each at its stated tolerance.

Every test prints a PASS/FAIL line (also collected into the terminal summary).
"""
import pytest

from conftest import ACCEPTANCE_LINES
from tsaw import battery
from tsaw.experiments import format_check, run_experiment

SEED = battery.DEFAULT_SEED


def _run(criterion):
    lines, ok = [], True
    for item in battery.items(SEED):
        if item.criterion != criterion:
            continue
        report = run_experiment(battery.config_for(item, SEED))
        ok &= report.passed
        lines += [f"    {format_check(report, c)}" for c in report.checks]
    return ok, lines


def _record(criterion, label, ok, lines):
    head = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {label}"
    print(head)
    for line in lines:
        print(line)
    ACCEPTANCE_LINES.append(head)
    assert ok, "\n".join([head] + lines)


@pytest.mark.parametrize("criterion, label", [
    (1, "weight oracles"),
    (2, "eta stationarity"),
    (3, "route equivalence"),
    (4, "profile marginal and endpoints"),
    (5, "total time"),
    (6, "hitting tails, relaxation and t-uniform tails"),
    pytest.param(7, "local limit", marks=pytest.mark.slow),
])
def test_criterion(criterion, label):
    ok, lines = _run(criterion)
    _record(criterion, label, ok, lines)


def test_criterion_8_determinism_and_calibration():
    same, info = battery.determinism(SEED)
    ok, lines = _run(8)
    lines.insert(0, f"    {'PASS' if same else 'FAIL'} byte-identical report.json ({info})")
    _record(8, "determinism and calibration", ok and same, lines)
