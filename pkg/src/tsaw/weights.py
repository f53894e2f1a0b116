"""Rate functions and the stationary objects derived from them.

A :class:`WeightModel` is a positive, non-decreasing, non-constant rate
function ``w``. Two kinds ship with closed forms: :class:`Exponential`
(``w(u) = exp(beta u)``) and :class:`StepTwoLevel` (``low`` below 0, ``high``
on ``u >= 0``). Further kinds only need ``w``; integrals and inverses then fall
back to adaptive quadrature and bracketed root finding.

Everything else in the package derives from three primitives: the rate
``w``, its integral over an interval, and the inverse of that integral
(hazard inversion). The compiled kernels use the scalar versions below,
keyed by ``(kind_code, p1, p2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import integrate, optimize

KIND_EXPONENTIAL = 0
KIND_STEP = 1

# e^{-W} below this is treated as zero when truncating the support
TRUNCATION = 1e-14
RHO_GRID_NODES = 4096


class InvalidInterval(ValueError):
    pass


# ---------------------------------------------------------------------------
# scalar kernels, shared by every compiled simulator


@numba.njit(cache=True)
def _log1pexp(z):
    # log(1 + e^z) without overflow
    if z > 30.0:
        return z + math.log1p(math.exp(-z))
    return math.log1p(math.exp(z))


@numba.njit(cache=True)
def k_w(kind, p1, p2, u):
    if kind == KIND_EXPONENTIAL:
        return math.exp(p1 * u)
    return p2 if u >= 0.0 else p1


@numba.njit(cache=True)
def k_integral(kind, p1, p2, a, b):
    if kind == KIND_EXPONENTIAL:
        # (e^{pb} - e^{pa}) / p, factored around the larger exponent
        return math.exp(p1 * b) * -math.expm1(p1 * (a - b)) / p1
    neg = min(b, 0.0) - min(a, 0.0)
    pos = max(b, 0.0) - max(a, 0.0)
    return p1 * neg + p2 * pos


@numba.njit(cache=True)
def k_invert(kind, p1, p2, x, e):
    """Unique y >= x with integral of w over [x, y] equal to e."""
    if kind == KIND_EXPONENTIAL:
        if e <= 0.0:
            return x
        return x + _log1pexp(math.log(p1 * e) - p1 * x) / p1
    if x >= 0.0:
        return x + e / p2
    cost = -x * p1
    if e <= cost:
        return x + e / p1
    return (e - cost) / p2


@numba.njit(cache=True)
def k_hold(kind, p1, p2, up, um, e):
    """Holding time s solving int_0^s [w(up+v) + w(um+v)] dv = e."""
    if kind == KIND_EXPONENTIAL:
        m = max(p1 * up, p1 * um)
        c = math.exp(p1 * up - m) + math.exp(p1 * um - m)
        return _log1pexp(math.log(p1 * e / c) - m) / p1
    # piecewise constant total rate; breakpoints where up+s or um+s cross 0
    brks = np.array([-up, -um, math.inf], dtype=np.float64)
    brks.sort()
    s = 0.0
    left = e
    for brk in brks:
        if brk <= s:
            continue
        rate = k_w(kind, p1, p2, up + s) + k_w(kind, p1, p2, um + s)
        span = brk - s
        if left <= rate * span:
            return s + left / rate
        left -= rate * span
        s = brk
    return s


# ---------------------------------------------------------------------------
# models


class WeightModel:
    """Base rate function. Subclasses must define :meth:`w`."""

    kind = "generic"

    def w(self, u: float) -> float:
        raise NotImplementedError

    def integral(self, a: float, b: float) -> float:
        if a == b:
            return 0.0
        pts = [0.0] if a < 0.0 < b else None
        val, _ = integrate.quad(self.w, a, b, points=pts, limit=200, epsabs=1e-13, epsrel=1e-13)
        return val

    def invert(self, x: float, e: float) -> float:
        if e <= 0.0:
            return x
        hi = x + e / self.w(x)
        while self.integral(x, hi) < e:
            hi = x + 2.0 * (hi - x)
        return optimize.brentq(lambda y: self.integral(x, y) - e, x, hi, xtol=1e-12)

    def hold(self, up: float, um: float, e: float) -> float:
        hi = min(self.invert(up, e) - up, self.invert(um, e) - um)

        def f(s):
            return self.integral(up, up + s) + self.integral(um, um + s) - e

        return optimize.brentq(f, 0.0, hi, xtol=1e-12)

    @property
    def kernel_params(self) -> tuple[int, float, float]:
        raise NotImplementedError(f"no compiled kernel for weight kind {self.kind!r}")

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(WeightModel):
    beta: float = 1.0
    kind = "exponential"

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def w(self, u):
        return math.exp(self.beta * u)

    def integral(self, a, b):
        return k_integral(KIND_EXPONENTIAL, self.beta, 0.0, a, b)

    def invert(self, x, e):
        return k_invert(KIND_EXPONENTIAL, self.beta, 0.0, x, e)

    def hold(self, up, um, e):
        return k_hold(KIND_EXPONENTIAL, self.beta, 0.0, up, um, e)

    @property
    def kernel_params(self):
        return (KIND_EXPONENTIAL, float(self.beta), 0.0)

    def to_dict(self):
        return {"kind": "exponential", "beta": self.beta}


@dataclass(frozen=True)
class StepTwoLevel(WeightModel):
    low: float = 1.0
    high: float = 2.0
    kind = "step"

    def __post_init__(self):
        if not (0 < self.low < self.high):
            raise ValueError("need 0 < low < high")

    def w(self, u):
        return self.high if u >= 0.0 else self.low

    def integral(self, a, b):
        return k_integral(KIND_STEP, self.low, self.high, a, b)

    def invert(self, x, e):
        return k_invert(KIND_STEP, self.low, self.high, x, e)

    def hold(self, up, um, e):
        return k_hold(KIND_STEP, self.low, self.high, up, um, e)

    @property
    def kernel_params(self):
        return (KIND_STEP, float(self.low), float(self.high))

    def to_dict(self):
        return {"kind": "step", "low": self.low, "high": self.high}


def model_from_dict(d: dict) -> WeightModel:
    kind = d.get("kind")
    if kind == "exponential":
        return Exponential(float(d.get("beta", 1.0)))
    if kind == "step":
        return StepTwoLevel(float(d.get("low", 1.0)), float(d.get("high", 2.0)))
    raise ValueError(f"unknown weight kind {kind!r}")


# ---------------------------------------------------------------------------
# operations


def evaluate_w(model: WeightModel, u: float) -> float:
    return model.w(u)


def integrate_w(model: WeightModel, a: float, b: float) -> float:
    if a > b:
        raise InvalidInterval(f"a={a} > b={b}")
    return model.integral(a, b)


def invert_hazard(model: WeightModel, x: float, e: float) -> float:
    """Return y >= x with ``integrate_w(model, x, y) == e``."""
    return model.invert(x, e)


def compute_W(model: WeightModel, u: float) -> float:
    """Potential W(u) = int_0^u (w(v) - w(-v)) dv; even and convex."""
    a = abs(u)
    return model.integral(0.0, a) - model.integral(-a, 0.0)


def support_bound(model: WeightModel) -> float:
    """Smallest U (to 1e-10) with exp(-W(U)) <= TRUNCATION."""
    target = -math.log(TRUNCATION)
    hi = 1.0
    while compute_W(model, hi) < target:
        hi *= 2.0
    return optimize.brentq(lambda u: compute_W(model, u) - target, 0.0, hi, xtol=1e-10)


def _half_moment(model, power):
    bound = support_bound(model)
    val, _ = integrate.quad(
        lambda u: u**power * math.exp(-compute_W(model, u)), 0.0, bound,
        limit=400, epsabs=1e-14, epsrel=1e-13,
    )
    return 2.0 * val


def compute_Z(model: WeightModel) -> float:
    return _half_moment(model, 0)


def compute_sigma2(model: WeightModel) -> float:
    return _half_moment(model, 2) / compute_Z(model)


@dataclass
class StationaryTables:
    """Tabulated stationary law rho(du) = exp(-W(u)) du / Z."""

    Z: float
    sigma2: float
    nodes: np.ndarray
    cdf: np.ndarray
    bound: float
    mu_weight: float = 0.5
    model: WeightModel | None = field(default=None, repr=False)

    @property
    def rho_cdf_grid(self):
        return np.column_stack([self.nodes, self.cdf])

    def rho_cdf(self, u):
        """Interpolated CDF of rho (vectorised)."""
        return np.interp(u, self.nodes, self.cdf, left=0.0, right=1.0)

    def rho_quantile(self, p):
        return np.interp(p, self.cdf, self.nodes)


def build_tables(model: WeightModel, nodes: int = RHO_GRID_NODES) -> StationaryTables:
    """Z, sigma^2 and the CDF of rho on ``nodes`` uniform nodes over [-U, U].

    The CDF is built on the positive half by 8-point Gauss-Legendre on each
    grid cell and mirrored, so CDF(-u) == 1 - CDF(u) by construction.
    """
    bound = support_bound(model)
    Z = compute_Z(model)
    sigma2 = compute_sigma2(model)
    grid = np.linspace(-bound, bound, nodes)
    pos = grid[grid > 0.0]
    edges = np.concatenate([[0.0], pos])
    gx, gw = np.polynomial.legendre.leggauss(8)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = mid[:, None] + half[:, None] * gx[None, :]
    vals = np.exp(-np.vectorize(lambda u: compute_W(model, u))(pts))
    cells = (vals * gw[None, :]).sum(axis=1) * half
    upper = 0.5 + np.cumsum(cells) / Z
    cdf_pos = np.minimum(upper, 1.0)
    cdf = np.empty_like(grid)
    cdf[grid > 0.0] = cdf_pos
    neg = grid < 0.0
    cdf[neg] = 1.0 - cdf_pos[::-1][: neg.sum()]
    cdf[grid == 0.0] = 0.5
    return StationaryTables(Z=Z, sigma2=sigma2, nodes=grid, cdf=cdf, bound=bound, model=model)


def sample_rho(model: WeightModel, tables: StationaryTables, rng) -> float:
    """Inverse-CDF draw from rho with linear interpolation between nodes."""
    return float(tables.rho_quantile(rng.random()))


def sample_Q(model: WeightModel, x: float, rng) -> float:
    """Upper endpoint of a jump from x: density exp(-int_x^y w) w(y) on y >= x."""
    return invert_hazard(model, x, rng.exponential())


def q_cdf(model: WeightModel, x: float, y):
    """Closed-form CDF of Q(x, .) at y."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    above = y >= x
    out[above] = [-math.expm1(-model.integral(x, v)) for v in y[above]]
    return out
