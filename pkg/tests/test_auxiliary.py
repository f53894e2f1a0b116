import math

import numpy as np
import pytest
from scipy import stats

from tsaw.auxiliary import (alpha_xi_evolve, alpha_xi_terminal, convergence_probe, eta_evolve,
                            eta_samples, eta_step, hitting_time, hitting_times,
                            l1_histogram_distance, probe_bins, tail_probe)
from tsaw.rng import ScriptedRNG, Stream
from tsaw.stats import ks_one_sample
from tsaw.weights import Exponential, StepTwoLevel, build_tables

STEP = StepTwoLevel(1.0, 2.0)
EXP1 = Exponential(1.0)


def laplace_cdf(u):
    u = np.asarray(u, dtype=float)
    return np.where(u < 0, 0.5 * np.exp(u), 1 - 0.5 * np.exp(-u))


def test_eta_step_example():
    jump_at, new = eta_step(STEP, 0.0, ScriptedRNG(exponentials=[1.0, 1.0]))
    assert jump_at == pytest.approx(0.5)
    assert new == pytest.approx(0.25)


def test_eta_step_lands_above_drifted_state():
    rng = Stream(3)
    for u in np.linspace(-3, 3, 25):
        jump_at, new = eta_step(EXP1, u, rng)
        assert new >= u - jump_at


def test_eta_evolve_zero_duration():
    assert eta_evolve(STEP, "delta0", 0.0, Stream(1)) == 0.0


def test_no_jump_mass():
    v = eta_samples(STEP, 0.0, [0.5], 20_000, 5)[:, 0]
    hits = int((v == -0.5).sum())
    p = math.exp(-1)
    assert abs(hits - 20_000 * p) < 4 * math.sqrt(20_000 * p * (1 - p))


def test_first_jump_survival_exponential_model():
    # no jump on [0, 1] from 0 iff eta(1) == -1 exactly
    n = 100_000
    v = eta_samples(EXP1, "delta0", [1.0], n, 8)[:, 0]
    p = math.exp(-(math.e - 1))
    hits = int((v == -1.0).sum())
    assert abs(hits - n * p) < 4 * math.sqrt(n * p * (1 - p))


def test_drift_bound():
    times = np.array([0.0, 0.3, 1.0, 2.5, 7.0])
    v = eta_samples(EXP1, "Q0", times, 2000, 4)
    start = v[:, :1]
    assert (v >= start - times[None, :] - 1e-12).all()


@pytest.mark.parametrize("init", ["delta0", "Q0", 0.7])
def test_kernel_matches_reference(init):
    batch = eta_samples(EXP1, init, [3.0], 40, 17, tag="cmp")[:, 0]
    # same draws; elapsed time is accumulated in a different order, hence the ulp tolerance
    for i in range(40):
        assert batch[i] == pytest.approx(eta_evolve(EXP1, init, 3.0, Stream(17, i, tag="cmp")), abs=1e-12)


def test_hitting_kernel_matches_reference():
    times, cens = hitting_times(STEP, 1.0, 0.0, "below", 30, 2, tag="h")
    for i in range(30):
        hs = hitting_time(STEP, 1.0, 0.0, "below", Stream(2, i, tag="h:below:0.0:1.0"))
        assert times[i] == hs.time and cens[i] == hs.censored


def test_stationarity_long_run():
    tables = build_tables(STEP)
    v = eta_samples(STEP, "delta0", [200.0], 10_000, 21)[:, 0]
    _, p = ks_one_sample(v, laplace_cdf)
    assert p > 0.01
    assert np.max(np.abs(tables.rho_cdf(np.linspace(-5, 5, 41)) - laplace_cdf(np.linspace(-5, 5, 41)))) < 1e-4


def _alternative_eta(u, duration, rng):
    """eta for the step model with jump hazard w(u) instead of w(-u)."""
    left = duration
    while True:
        # hazard w(u - s) along the drift; mirrored step: rate 2 while u - s >= 0, else 1
        e = rng.exponential()
        if u > 0 and e <= 2 * u:
            jump_at = e / 2
        else:
            jump_at = max(u, 0.0) + (e - 2 * max(u, 0.0))
        if jump_at >= left:
            return u - left
        u = STEP.invert(u - jump_at, rng.exponential())
        left -= jump_at


def test_alternative_hazard_breaks_stationarity():
    g = np.random.default_rng(0)

    class R:
        exponential = staticmethod(lambda: g.exponential())

    v = np.array([_alternative_eta(0.0, 40.0, R) for _ in range(3000)])
    d, p = ks_one_sample(v, laplace_cdf)
    assert p < 1e-6, d


def test_alpha_xi_first_flip_rate():
    flips = []
    for i in range(2000):
        path = alpha_xi_evolve(STEP, -1, 0.0, 50.0, Stream(6, i))
        flips.append(path.flips[0] if path.flips.size else 50.0)
    _, p = stats.kstest(flips, "expon", args=(0, 0.5))
    assert p > 1e-3


def test_alpha_xi_path_shape():
    path = alpha_xi_evolve(EXP1, 1, 0.4, 10.0, Stream(2))
    assert path.duration == pytest.approx(10.0)
    assert np.allclose(np.diff(path.xi), path.alpha * np.diff(path.s))
    assert np.all(path.alpha[1:] != path.alpha[:-1])


def test_alpha_xi_stationary_measure():
    n = 10_000
    alpha, xi, plus = alpha_xi_terminal(STEP, -1, 0.0, 200.0, n, 12)
    _, p = ks_one_sample(xi, laplace_cdf)
    assert p > 1e-3
    k = int((alpha == 1).sum())
    assert abs(k - n / 2) < 4 * math.sqrt(n / 4)
    assert abs(np.mean(plus) / 200.0 - 0.5) < 0.02


def test_hitting_examples():
    for kind in ("below", "above"):
        assert hitting_time(STEP, 1.0, 1.0, kind, Stream(0)).time == 0.0
    hs = hitting_time(STEP, 2.5, 1.0, "below", ScriptedRNG(exponentials=[100.0]))
    assert hs.time == 1.5
    times, _ = hitting_times(STEP, 1.0, 0.0, "below", 10_000, 3)
    assert (times == 1.0).mean() >= math.exp(-2) - 4 * math.sqrt(0.12 / 10_000)
    with pytest.raises(ValueError):
        hitting_time(STEP, 0.0, 1.0, "below", Stream(0))


def test_hitting_censoring():
    times, cens = hitting_times(STEP, -50.0, 50.0, "above", 200, 3, t_cap=1.0)
    assert cens.all() and (times == 1.0).all()


def test_convergence_probe_bounds():
    tables = build_tables(STEP)
    d0 = convergence_probe(STEP, "delta0", 1e-9, 1000, 1, tables)
    edges, probs = probe_bins(tables)
    zero_bin = probs[np.searchsorted(edges, -1e-9) - 1]
    assert d0 == pytest.approx(2 * (1 - zero_bin), abs=1e-9)
    for t in (1.0, 10.0):
        d = convergence_probe(STEP, "Q0", t, 2000, 1, tables)
        assert 0.0 <= d <= 2.0
    with pytest.raises(ValueError):
        convergence_probe(STEP, "Q0", 1.0, 10, 1, tables)


def test_l1_distance_counts_outside_mass():
    tables = build_tables(STEP)
    assert l1_histogram_distance(np.full(100, 1e6), tables) == pytest.approx(2.0)


def test_tail_probe_shape():
    x = np.linspace(-40, 5, 30)
    tab = tail_probe(STEP, "delta0", [1.0, 5.0], x, 2000, 9)
    assert np.all(tab.estimate[:, 0] == 1.0)
    assert np.all(np.diff(tab.estimate, axis=1) <= 0)
    assert tab.stderr.shape == tab.estimate.shape
