"""Small statistical toolkit: KS tests, tail fits, binomial checks.

KS statistics are computed directly (so CDFs with atoms are handled
correctly) and p-values use the asymptotic Kolmogorov distribution.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .errors import UndersizedSample

MIN_KS_SAMPLE = 50


def ks_two_sample(a, b) -> tuple[float, float]:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n, m = a.size, b.size
    if n < MIN_KS_SAMPLE or m < MIN_KS_SAMPLE:
        raise UndersizedSample(f"need at least {MIN_KS_SAMPLE} per sample, got {n} and {m}")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / n
    fb = np.searchsorted(b, pts, side="right") / m
    d = float(np.max(np.abs(fa - fb)))
    en = n * m / (n + m)
    return d, float(stats.kstwobign.sf(d * math.sqrt(en)))


def ks_one_sample(a, cdf, cdf_left=None) -> tuple[float, float]:
    """One-sample KS against ``cdf``; pass ``cdf_left`` (F(x-)) when F has atoms."""
    a = np.sort(np.asarray(a, dtype=float))
    n = a.size
    if n < MIN_KS_SAMPLE:
        raise UndersizedSample(f"need at least {MIN_KS_SAMPLE} samples, got {n}")
    f = np.clip(np.asarray(cdf(a), dtype=float), 0.0, 1.0)
    fl = f if cdf_left is None else np.clip(np.asarray(cdf_left(a), dtype=float), 0.0, 1.0)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(fl - (i - 1) / n)))
    return d, float(stats.kstwobign.sf(d * math.sqrt(n)))


def ks_critical(n: int, alpha: float, m: int | None = None) -> float:
    """Asymptotic critical distance at level ``alpha`` (two-sample if ``m`` given)."""
    en = n if m is None else n * m / (n + m)
    return float(stats.kstwobign.isf(alpha) / math.sqrt(en))


def fit_exp_tail(xs, ps) -> tuple[float, float]:
    """Least-squares fit of log(ps) against xs; returns (decay rate, R^2)."""
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    if (ps <= 0).any():
        raise ValueError("exceedance estimates must be strictly positive")
    logp = np.log(ps)
    slope, intercept = np.polyfit(xs, logp, 1)
    resid = logp - (slope * xs + intercept)
    ss_tot = float(np.sum((logp - logp.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return float(-slope), r2


def survival_on_quantile_grid(samples, lo: float = 0.5, hi: float = 0.995, points: int = 20):
    """Empirical P(X > t) on ``points`` evenly spaced t between two sample quantiles."""
    samples = np.sort(np.asarray(samples, dtype=float))
    grid = np.linspace(np.quantile(samples, lo), np.quantile(samples, hi), points)
    surv = 1.0 - np.searchsorted(samples, grid, side="right") / samples.size
    return grid, surv


def binomial_z(successes: int, n: int, p: float) -> float:
    return (successes - n * p) / math.sqrt(n * p * (1.0 - p))


def two_proportion_p(k1: int, n1: int, k2: int, n2: int) -> float:
    """Two-sided pooled z-test p-value for equal proportions."""
    pool = (k1 + k2) / (n1 + n2)
    if pool in (0.0, 1.0):
        return 1.0
    se = math.sqrt(pool * (1 - pool) * (1 / n1 + 1 / n2))
    z = (k1 / n1 - k2 / n2) / se
    return float(2 * stats.norm.sf(abs(z)))


def censor(values, censored, cap):
    """Replace censored entries by ``cap``, so ECDFs below ``cap`` stay exact."""
    out = np.asarray(values, dtype=float).copy()
    out[np.asarray(censored, dtype=bool)] = cap
    return out
