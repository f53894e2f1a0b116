import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from tsaw.errors import UndersizedSample
from tsaw.stats import (binomial_z, censor, fit_exp_tail, ks_critical, ks_one_sample,
                        ks_two_sample, survival_on_quantile_grid, two_proportion_p)

samples = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=50, max_size=200)


def test_ks_two_sample_examples():
    a = np.random.default_rng(0).random(500)
    assert ks_two_sample(a, a[::-1])[0] == 0.0
    g = np.random.default_rng(1)
    d, p = ks_two_sample(g.random(10_000), g.random(10_000) + 0.5)
    assert d == pytest.approx(0.5, abs=0.03) and p < 1e-10
    with pytest.raises(UndersizedSample):
        ks_two_sample(np.zeros(10), np.zeros(100))


@given(samples, samples)
def test_ks_two_sample_matches_scipy(a, b):
    d, _ = ks_two_sample(a, b)
    assert 0.0 <= d <= 1.0
    assert d == pytest.approx(sps.ks_2samp(a, b, method="asymp").statistic, abs=1e-12)


def test_ks_one_sample_examples():
    g = np.random.default_rng(2)
    x = g.normal(size=2000)
    d, _ = ks_one_sample(x, sps.norm.cdf)
    assert d == pytest.approx(sps.kstest(x, "norm").statistic, abs=1e-12)
    assert ks_one_sample(np.full(100, 0.3), lambda u: np.clip(u, 0, 1))[0] >= 0.5
    # cdf values outside [0, 1] are clipped
    d, _ = ks_one_sample(g.random(100), lambda u: 2 * u - 0.5)
    assert 0.0 <= d <= 1.0


def test_ks_one_sample_with_atom():
    g = np.random.default_rng(3)
    x = np.where(g.random(5000) < 0.3, 0.0, g.exponential(size=5000))

    def cdf(z):
        return np.where(z >= 0, 0.3 + 0.7 * (1 - np.exp(-np.maximum(z, 0))), 0.0)

    def cdf_left(z):
        return np.where(z > 0, cdf(z), 0.0)

    assert ks_one_sample(x, cdf, cdf_left)[1] > 1e-3
    # ignoring the atom shows up as a spurious distance of about 0.3
    assert ks_one_sample(x, lambda z: np.where(z > 0, cdf(z), 0.0))[0] > 0.25


def test_one_sample_calibration():
    rej = 0
    for seed in range(200):
        x = np.random.default_rng(seed).random(10_000)
        rej += ks_one_sample(x, lambda u: u)[1] <= 1e-3
    assert rej <= 2


def test_ks_critical():
    assert ks_critical(10_000, 0.01) == pytest.approx(0.0163, abs=1e-4)


def test_fit_exp_tail_examples():
    x = np.linspace(0, 5, 20)
    g, r2 = fit_exp_tail(x, np.exp(-2 * x))
    assert g == pytest.approx(2.0) and r2 == pytest.approx(1.0)
    ps = np.exp(-x)
    ps[5:10] = ps[5]
    assert fit_exp_tail(x, ps)[1] < 1.0
    assert fit_exp_tail(x, 1 / (1 + x))[0] > 0
    with pytest.raises(ValueError):
        fit_exp_tail(x, np.concatenate([np.exp(-x[:-1]), [0.0]]))


def test_survival_grid():
    x = np.random.default_rng(0).exponential(size=20_000)
    grid, surv = survival_on_quantile_grid(x)
    assert grid.size == 20 and np.all(np.diff(surv) <= 0)
    assert np.max(np.abs(surv - np.exp(-grid))) < 0.01


def test_binomial_helpers():
    assert binomial_z(50, 100, 0.5) == 0.0
    assert two_proportion_p(10, 100, 10, 100) == pytest.approx(1.0)
    assert two_proportion_p(0, 100, 0, 100) == 1.0
    assert two_proportion_p(10, 1000, 90, 1000) < 1e-10
    assert list(censor([1.0, 5.0, 2.0], [False, True, False], 3.0)) == [1.0, 3.0, 2.0]
