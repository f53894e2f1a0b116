"""Limiting objects: two-sided reflected Brownian motion, its zeros and area.

``W_{x,h} = |B|`` where ``B(x) = h`` and ``B`` runs independently to the
right and to the left of ``x`` on a grid of step ``dy``. The right end is the
first zero of ``B`` beyond ``max(0, x)``, the left end the first zero before
``min(0, x)``. A zero inside a grid step is detected either as a sign change
of ``B`` (located by linear interpolation) or, when both ends of the step
have the same sign, by the Brownian-bridge crossing probability
``exp(-2 B_i B_{i+1} / dy)`` (located at the step midpoint). The area is the
trapezoidal integral of ``|B|`` between the two ends.

Laplace-transform estimators:

    omega_hat(s, x, h) = s E[exp(-s T_{x,h})]
    phi_hat(s, x)      = int_0^inf omega_hat(s, x, h) dh
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import special

from . import rng as rngmod
from .auxiliary import _key
from .errors import BudgetExhausted

DEFAULT_DY = 1e-3
DEFAULT_SPAN_CAP = 1e4
PHI_NODES = 64
# exp(-s T) below this counts as zero, so paths stop once s T exceeds -log of it
LAPLACE_FLOOR = 1e-12
TAIL_FRACTION = 1e-3

OK = 0
SPAN = 1
AREA = 2


@numba.njit(cache=True)
def _side(state, x, h, direction, dy, span_cap, area_cap, area0, ys, vs):
    """Walk one side from the anchor. Returns (zero, area, status, nodes stored).

    ``ys``/``vs`` receive node positions and values when non-empty; their
    length then bounds the number of steps.
    """
    store = ys.shape[0] > 0
    sq = math.sqrt(dy)
    boundary = max(0.0, x) if direction > 0 else min(0.0, x)
    y0 = x
    b0 = h
    area = area0
    m = 0
    if store:
        ys[0] = y0
        vs[0] = abs(b0)
        m = 1
    if h == 0.0 and y0 == boundary:
        return y0, area, OK, m
    steps = 0
    while True:
        b1 = b0 + sq * rngmod.normal(state)
        y1 = y0 + direction * dy
        beyond = y1 > boundary if direction > 0 else y1 < boundary
        if beyond:
            z = math.nan
            if b0 * b1 <= 0.0:
                a0 = abs(b0)
                tot = a0 + abs(b1)
                frac = a0 / tot if tot > 0.0 else 0.0
                z = y0 + direction * dy * frac
            else:
                expo = 2.0 * b0 * b1 / dy
                if expo < 40.0 and rngmod.uniform(state) < math.exp(-expo):
                    z = y0 + direction * 0.5 * dy
            if z == z:
                past = z > boundary if direction > 0 else z < boundary
                if past or z == boundary:
                    area += 0.5 * abs(b0) * abs(z - y0)
                    if store:
                        ys[m] = z
                        vs[m] = 0.0
                        m += 1
                    return z, area, OK, m
        area += 0.5 * (abs(b0) + abs(b1)) * dy
        y0 = y1
        b0 = b1
        steps += 1
        if store:
            if m >= ys.shape[0]:
                return y0, area, SPAN, m
            ys[m] = y0
            vs[m] = abs(b0)
            m += 1
        if abs(y0 - x) > span_cap:
            return y0, area, SPAN, m
        if area > area_cap:
            return y0, area, AREA, m


_EMPTY = np.empty(0)


@numba.njit(cache=True)
def _rbm_batch(x, h, dy, master, tag, first, n, span_cap, area_cap):
    lam = np.empty(n)
    rho = np.empty(n)
    area = np.empty(n)
    status = np.zeros(n, dtype=np.int64)
    state = np.empty(4, dtype=np.uint64)
    empty = np.empty(0)
    for i in range(n):
        rngmod.derive_state(master, tag, first + i, state)
        z1, a, st1, _ = _side(state, x, h, 1, dy, span_cap, area_cap, 0.0, empty, empty)
        z0, a, st0, _ = _side(state, x, h, -1, dy, span_cap, area_cap, a, empty, empty)
        rho[i] = z1
        lam[i] = z0
        area[i] = a
        # bit 1/2: right/left side span cap; bit 4: area cap
        st = 0
        if st1 == SPAN:
            st |= 1
        if st0 == SPAN:
            st |= 2
        if st1 == AREA or st0 == AREA:
            st |= 4
        status[i] = st
    return lam, rho, area, status


@numba.njit(cache=True)
def _laplace_batch(x, h, s, dy, master, tag, first, n, span_cap, area_cap):
    """Sum and sum of squares of s*exp(-s*T) over n paths, and a censor count."""
    total = 0.0
    total2 = 0.0
    lost = 0
    state = np.empty(4, dtype=np.uint64)
    empty = np.empty(0)
    for i in range(n):
        rngmod.derive_state(master, tag, first + i, state)
        z1, a, st1, _ = _side(state, x, h, 1, dy, span_cap, area_cap, 0.0, empty, empty)
        v = 0.0
        if st1 == OK:
            z0, a, st0, _ = _side(state, x, h, -1, dy, span_cap, area_cap, a, empty, empty)
            if st0 == OK:
                v = s * math.exp(-s * a)
            elif st0 == SPAN:
                lost += 1
        elif st1 == SPAN:
            lost += 1
        total += v
        total2 += v * v
    return total, total2, lost


# ---------------------------------------------------------------------------
# single path


@dataclass
class ReflectedBMPath:
    """Nodes of W_{x,h} on both sides of the anchor, each ending at its zero."""

    x: float
    h: float
    dy: float
    right_y: np.ndarray
    right_values: np.ndarray
    left_y: np.ndarray
    left_values: np.ndarray
    left_zero: float
    right_zero: float


@dataclass
class AreaSample:
    value: float
    dy: float


def simulate_reflected_bm(x: float, h: float, dy: float, rng,
                          span_cap: float = DEFAULT_SPAN_CAP) -> ReflectedBMPath:
    if dy > 0.01:
        raise ValueError("dy must be at most 0.01")
    if h < 0:
        raise ValueError("h must be nonnegative")
    if isinstance(rng, rngmod.Stream):
        state = rng.state
    else:
        state = np.empty(4, dtype=np.uint64)
        rngmod.derive_state(int(rng), rngmod.tag_id("rbm"), 0, state)
    cap = int(span_cap / dy) + 4
    out = []
    for direction in (1, -1):
        ys = np.empty(cap)
        vs = np.empty(cap)
        z, _, st, m = _side(state, float(x), float(h), direction, float(dy), float(span_cap),
                            math.inf, 0.0, ys, vs)
        if st != OK:
            raise BudgetExhausted(f"no zero within span {span_cap}")
        out.append((z, ys[:m], vs[:m]))
    (rz, ry, rv), (lz, ly, lv) = out
    return ReflectedBMPath(x=float(x), h=float(h), dy=float(dy), right_y=ry, right_values=rv,
                           left_y=ly, left_values=lv, left_zero=lz, right_zero=rz)


def area(path: ReflectedBMPath) -> AreaSample:
    right = np.sum(0.5 * (path.right_values[1:] + path.right_values[:-1]) * np.abs(np.diff(path.right_y)))
    left = np.sum(0.5 * (path.left_values[1:] + path.left_values[:-1]) * np.abs(np.diff(path.left_y)))
    return AreaSample(value=float(right + left), dy=path.dy)


# ---------------------------------------------------------------------------
# batches and estimators


@dataclass
class RBMBatch:
    """Endpoints and areas of many paths.

    ``status`` bits: 1 right end beyond the span cap, 2 left end beyond it,
    4 area above ``area_cap`` (the area is then only known to exceed it and
    the endpoints are unreliable).
    """

    x: float
    h: float
    dy: float
    left_zero: np.ndarray
    right_zero: np.ndarray
    area: np.ndarray
    status: np.ndarray


def simulate_rbm_batch(x: float, h: float, n: int, rng, dy: float = DEFAULT_DY,
                       span_cap: float = DEFAULT_SPAN_CAP, area_cap: float = math.inf,
                       tag="rbm") -> RBMBatch:
    master, tg, first = _key(rng, tag)
    lam, rho, ar, st = _rbm_batch(float(x), float(h), float(dy), master, tg, int(first),
                                  int(n), float(span_cap), float(area_cap))
    return RBMBatch(float(x), float(h), float(dy), lam, rho, ar, st)


def _area_cap(s: float) -> float:
    return -math.log(LAPLACE_FLOOR) / s


def estimate_omega_hat(s: float, x: float, h: float, n: int, rng, dy: float = 1e-2,
                       span_cap: float = DEFAULT_SPAN_CAP, tag="omega") -> tuple[float, float]:
    """Monte Carlo s E[exp(-s T_{x,h})] with its standard error."""
    if n < 1000:
        raise ValueError("n must be at least 1000")
    return _omega(s, x, h, n, rng, dy, span_cap, tag)


def _omega(s, x, h, n, rng, dy, span_cap, tag):
    if h == 0.0 and x == 0.0:
        # both zeros sit at the anchor, T = 0
        return float(s), 0.0
    master, tg, first = _key(rng, f"{tag}:{s!r}:{x!r}:{h!r}")
    tot, tot2, lost = _laplace_batch(float(x), float(h), float(s), float(dy), master, tg,
                                     int(first), int(n), float(span_cap), _area_cap(s))
    if lost:
        raise BudgetExhausted(f"{lost} paths exceeded span {span_cap}")
    mean = tot / n
    var = max(tot2 / n - mean * mean, 0.0)
    return mean, math.sqrt(var / n)


@dataclass
class PhiHatEstimate:
    s: float
    x: float
    estimate: float
    stderr: float
    mc_error: float
    quad_error: float
    n: int
    dy: float
    H: float
    h_grid: np.ndarray
    omega: np.ndarray
    omega_se: np.ndarray

    def row(self):
        return (self.s, self.x, self.estimate, self.stderr, self.n, self.dy, self.H)


def choose_h_cutoff(s: float, x: float, rng, dy: float, n_pilot: int, tag="phi-pilot") -> float:
    """Double H until omega_hat(H) * H is below TAIL_FRACTION of the running integral."""
    H = 0.5 / s ** (1.0 / 3.0)
    hs = [0.0]
    om = [_omega(s, x, 0.0, n_pilot, rng, dy, DEFAULT_SPAN_CAP, tag)[0]]
    while True:
        hs.append(H)
        om.append(_omega(s, x, H, n_pilot, rng, dy, DEFAULT_SPAN_CAP, tag)[0])
        running = np.trapezoid(om, hs)
        if om[-1] * H < TAIL_FRACTION * running or (running == 0.0 and H > 64.0 / s ** (1 / 3)):
            return H
        H *= 2.0


def estimate_phi_hat(s: float, x: float, n: int, rng, h_grid=None, dy: float = 1e-2,
                     n_pilot: int = 400, tag="phi") -> PhiHatEstimate:
    """Trapezoidal integral over h of omega_hat(s, x, h).

    Without ``h_grid`` the cutoff H is chosen adaptively and 64 uniform
    nodes cover [0, H]. The reported ``stderr`` adds the Monte Carlo error,
    a Richardson-style quadrature error and the neglected-tail bound.
    """
    if h_grid is None:
        H = choose_h_cutoff(s, x, rng, dy, n_pilot, tag=f"{tag}-pilot")
        h_grid = np.linspace(0.0, H, PHI_NODES)
    h_grid = np.asarray(h_grid, dtype=float)
    H = float(h_grid[-1])
    om = np.empty(h_grid.size)
    se = np.empty(h_grid.size)
    for i, h in enumerate(h_grid):
        om[i], se[i] = _omega(s, x, h, n, rng, dy, DEFAULT_SPAN_CAP, tag)
    w = np.zeros(h_grid.size)
    d = np.diff(h_grid)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    est = float(w @ om)
    mc = float(math.sqrt(np.sum((w * se) ** 2)))
    coarse_idx = np.arange(0, h_grid.size, 2)
    if coarse_idx[-1] != h_grid.size - 1:
        coarse_idx = np.append(coarse_idx, h_grid.size - 1)
    coarse = float(np.trapezoid(om[coarse_idx], h_grid[coarse_idx]))
    quad = abs(est - coarse) / 3.0
    tail = float(om[-1] * H * TAIL_FRACTION)
    return PhiHatEstimate(s=s, x=x, estimate=est, stderr=mc + quad + tail, mc_error=mc,
                          quad_error=quad, n=n, dy=dy, H=H, h_grid=h_grid, omega=om, omega_se=se)


def write_estimates_csv(estimates, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["s", "x", "estimate", "stderr", "n", "dy", "H"])
        for e in estimates:
            out.writerow([repr(float(v)) if isinstance(v, float) else v for v in e.row()])


# ---------------------------------------------------------------------------
# closed forms (method of images)


def reflected_normal_pdf(z, h: float, t: float):
    """Density of |B(t)| with B(0) = h: the folded normal."""
    z = np.asarray(z, dtype=float)
    c = 1.0 / math.sqrt(2.0 * math.pi * t)
    out = c * (np.exp(-((z - h) ** 2) / (2 * t)) + np.exp(-((z + h) ** 2) / (2 * t)))
    return np.where(z >= 0, out, 0.0)


def reflected_normal_cdf(z, h: float, t: float):
    z = np.asarray(z, dtype=float)
    r = math.sqrt(2.0 * t)
    out = 0.5 * (special.erf((z - h) / r) + special.erf((z + h) / r))
    return np.where(z >= 0, out, 0.0)


def absorbed_value_cdf(z, h: float, t: float):
    """CDF of |B(t)| killed at the first zero (value 0 after it), B(0) = h > 0.

    Atom 2 P(N > h / sqrt t) at zero; for z >= 0 the surviving density is
    phi_t(z - h) - phi_t(z + h).
    """
    z = np.asarray(z, dtype=float)
    r = math.sqrt(2.0 * t)
    surv_above = 0.5 * (special.erfc((z - h) / r) - special.erfc((z + h) / r))
    return np.where(z >= 0, 1.0 - surv_above, 0.0)


def absorbed_value_cdf_left(z, h: float, t: float):
    z = np.asarray(z, dtype=float)
    return np.where(z > 0, absorbed_value_cdf(z, h, t), 0.0)


def first_zero_cdf(y, h: float):
    """P(first zero of B within time y | B(0) = h) = erfc(h / sqrt(2 y))."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    pos = y > 0
    out[pos] = special.erfc(h / np.sqrt(2.0 * y[pos]))
    if h == 0:
        out[y >= 0] = 1.0
    return out
