"""The auxiliary edge processes, simulated on their own.

``eta`` drifts down at unit speed and jumps upward. At state ``u`` the jump
hazard is ``w(-u)`` (so ``w(s - u)`` after ``s`` units of drift from ``u``),
and a jump from ``x`` lands at ``y >= x`` with density
``exp(-int_x^y w) w(y)``, i.e. at :func:`~tsaw.weights.sample_Q`. With this
hazard ``rho ∝ exp(-W)`` is stationary.

``(alpha, xi)`` moves ``xi`` at slope ``alpha`` and flips ``alpha`` at rate
``w(alpha * xi)``.

Initial laws are given either as a number or as ``"delta0"`` (start at 0) or
``"Q0"`` (start at a draw from Q(0, .)).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numba
import numpy as np

from . import rng as rngmod
from .walk import EdgeProcessPath
from .weights import StationaryTables, WeightModel, build_tables, k_invert

INIT_DELTA0 = "delta0"
INIT_Q0 = "Q0"
DEFAULT_T_CAP = 1e4
PROBE_BINS = 200


def _init_code(init) -> tuple[int, float]:
    if isinstance(init, str):
        if init == INIT_DELTA0:
            return 0, 0.0
        if init == INIT_Q0:
            return 1, 0.0
        raise ValueError(f"unknown initial law {init!r}")
    return 2, float(init)


def _key(rng, default_tag):
    """(master, tag, first index) for a batch kernel from an int seed or a Stream."""
    if isinstance(rng, rngmod.Stream):
        return np.uint64(rng.master_seed), np.uint64(rng.tag), rng.index << 32
    return np.uint64(int(rng)), np.uint64(rngmod.tag_id(default_tag)), 0


# ---------------------------------------------------------------------------
# single-path reference operations


@dataclass
class HittingSample:
    barrier: float
    kind: str
    time: float
    censored: bool = False


def eta_step(model: WeightModel, u: float, rng) -> tuple[float, float]:
    """Next jump of eta from ``u``: (time to jump, post-jump value)."""
    jump_at = model.invert(-u, rng.exponential()) + u
    return jump_at, model.invert(u - jump_at, rng.exponential())


def _initial_value(model, init, rng):
    code, value = _init_code(init)
    if code == 0:
        return 0.0
    if code == 1:
        return model.invert(0.0, rng.exponential())
    return value


def eta_evolve(model: WeightModel, init, duration: float, rng) -> float:
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    u = _initial_value(model, init, rng)
    left = duration
    while True:
        jump_at = model.invert(-u, rng.exponential()) + u
        if jump_at >= left:
            return u - left
        u = model.invert(u - jump_at, rng.exponential())
        left -= jump_at


def alpha_xi_evolve(model: WeightModel, alpha0: int, xi0: float, duration: float,
                    rng) -> EdgeProcessPath:
    """Path of (alpha, xi) over [0, duration] from (alpha0, xi0)."""
    if alpha0 not in (-1, 1):
        raise ValueError("alpha0 must be +1 or -1")
    s = [0.0]
    xi = [float(xi0)]
    alpha = []
    a = alpha0
    while s[-1] < duration:
        ax = a * xi[-1]
        flip_in = model.invert(ax, rng.exponential()) - ax
        d = min(flip_in, duration - s[-1])
        alpha.append(a)
        s.append(s[-1] + d)
        xi.append(xi[-1] + a * d)
        a = -a
    if not alpha:
        alpha.append(alpha0)
        s.append(0.0)
        xi.append(float(xi0))
    return EdgeProcessPath(k=None, s=np.array(s), xi=np.array(xi),
                           alpha=np.array(alpha, dtype=np.int64), t=np.array(s[:-1]))


def hitting_time(model: WeightModel, y: float, b: float, kind: str, rng,
                 t_cap: float = DEFAULT_T_CAP) -> HittingSample:
    """First time eta started at ``y`` reaches ``b`` from above or below.

    ``below`` (needs y >= b) crosses continuously on the drift; ``above``
    (needs y <= b) crosses on a jump. Past ``t_cap`` the sample is censored.
    """
    if kind == "below":
        if y < b:
            raise ValueError("below needs y >= b")
    elif kind == "above":
        if y > b:
            raise ValueError("above needs y <= b")
    else:
        raise ValueError(f"unknown kind {kind!r}")
    code = 0 if kind == "below" else 1
    if (code == 0 and y <= b) or (code == 1 and y >= b):
        return HittingSample(b, kind, 0.0)
    u = y
    t = 0.0
    while t <= t_cap:
        jump_at = model.invert(-u, rng.exponential()) + u
        if code == 0 and u - jump_at <= b:
            return HittingSample(b, kind, t + (u - b))
        t += jump_at
        u = model.invert(u - jump_at, rng.exponential())
        if code == 1 and u >= b:
            return HittingSample(b, kind, t)
    return HittingSample(b, kind, t_cap, censored=True)


# ---------------------------------------------------------------------------
# compiled kernels (draw order identical to the reference functions)


@numba.njit(cache=True)
def _init_value(kind, p1, p2, code, value, state):
    if code == 0:
        return 0.0
    if code == 1:
        return k_invert(kind, p1, p2, 0.0, rngmod.exponential(state))
    return value


@numba.njit(cache=True)
def eta_path_values(kind, p1, p2, u, times, state, out):
    """Write eta at each of the sorted ``times`` along one path started at ``u``."""
    t = 0.0
    m = 0
    nt = times.shape[0]
    while m < nt:
        jump_at = k_invert(kind, p1, p2, -u, rngmod.exponential(state)) + u
        while m < nt and t + jump_at >= times[m]:
            out[m] = u - (times[m] - t)
            m += 1
        if m == nt:
            return
        t += jump_at
        u = k_invert(kind, p1, p2, u - jump_at, rngmod.exponential(state))


@numba.njit(cache=True)
def eta_value(kind, p1, p2, u, duration, state):
    left = duration
    while True:
        jump_at = k_invert(kind, p1, p2, -u, rngmod.exponential(state)) + u
        if jump_at >= left:
            return u - left
        u = k_invert(kind, p1, p2, u - jump_at, rngmod.exponential(state))
        left -= jump_at


@numba.njit(cache=True)
def _eta_batch(kind, p1, p2, code, value, times, master, tag, first, n):
    out = np.empty((n, times.shape[0]))
    state = np.empty(4, dtype=np.uint64)
    for i in range(n):
        rngmod.derive_state(master, tag, first + i, state)
        u = _init_value(kind, p1, p2, code, value, state)
        eta_path_values(kind, p1, p2, u, times, state, out[i])
    return out


@numba.njit(cache=True)
def _hitting_batch(kind, p1, p2, y, b, code, t_cap, master, tag, first, n):
    out = np.empty(n)
    cens = np.zeros(n, dtype=np.bool_)
    state = np.empty(4, dtype=np.uint64)
    for i in range(n):
        rngmod.derive_state(master, tag, first + i, state)
        if (code == 0 and y <= b) or (code == 1 and y >= b):
            out[i] = 0.0
            continue
        u = y
        t = 0.0
        done = False
        while t <= t_cap:
            jump_at = k_invert(kind, p1, p2, -u, rngmod.exponential(state)) + u
            if code == 0 and u - jump_at <= b:
                out[i] = t + (u - b)
                done = True
                break
            t += jump_at
            u = k_invert(kind, p1, p2, u - jump_at, rngmod.exponential(state))
            if code == 1 and u >= b:
                out[i] = t
                done = True
                break
        if not done:
            out[i] = t_cap
            cens[i] = True
    return out, cens


@numba.njit(cache=True)
def _alpha_xi_batch(kind, p1, p2, alpha0, xi0, duration, master, tag, first, n):
    alpha = np.empty(n, dtype=np.int64)
    xi = np.empty(n)
    plus_time = np.empty(n)
    state = np.empty(4, dtype=np.uint64)
    for i in range(n):
        rngmod.derive_state(master, tag, first + i, state)
        a = alpha0
        x = xi0
        s = 0.0
        tp = 0.0
        while s < duration:
            ax = a * x
            d = k_invert(kind, p1, p2, ax, rngmod.exponential(state)) - ax
            if d > duration - s:
                d = duration - s
            if a > 0:
                tp += d
            s += d
            x += a * d
            a = -a
        # the last segment ran with sign -a; undo the trailing flip
        alpha[i] = -a if duration > 0 else alpha0
        xi[i] = x
        plus_time[i] = tp
    return alpha, xi, plus_time


# ---------------------------------------------------------------------------
# batch front ends


def eta_samples(model: WeightModel, init, times, n: int, rng, tag="eta") -> np.ndarray:
    """(n, len(times)) array of eta observed at sorted ``times`` along independent paths."""
    kind, p1, p2 = model.kernel_params
    code, value = _init_code(init)
    master, tg, first = _key(rng, tag)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if (np.diff(times) < 0).any():
        raise ValueError("times must be sorted")
    return _eta_batch(kind, p1, p2, code, value, times, master, tg, first, int(n))


def hitting_times(model: WeightModel, y: float, b: float, kind: str, n: int, rng,
                  t_cap: float = DEFAULT_T_CAP, tag="hitting"):
    """Arrays (times, censored) of ``n`` independent hitting samples."""
    if kind == "below" and y < b or kind == "above" and y > b:
        raise ValueError("start on the wrong side of the barrier")
    kc, p1, p2 = model.kernel_params
    master, tg, first = _key(rng, f"{tag}:{kind}:{b}:{y}")
    return _hitting_batch(kc, p1, p2, float(y), float(b), 0 if kind == "below" else 1,
                          float(t_cap), master, tg, first, int(n))


def alpha_xi_terminal(model: WeightModel, alpha0: int, xi0: float, duration: float,
                      n: int, rng, tag="alpha-xi"):
    """Terminal (alpha, xi) and time spent at alpha=+1 for ``n`` paths."""
    kind, p1, p2 = model.kernel_params
    master, tg, first = _key(rng, tag)
    return _alpha_xi_batch(kind, p1, p2, int(alpha0), float(xi0), float(duration),
                           master, tg, first, int(n))


def probe_bins(tables: StationaryTables, nbins: int = PROBE_BINS):
    edges = np.linspace(-tables.bound, tables.bound, nbins + 1)
    probs = np.diff(tables.rho_cdf(edges))
    return edges, probs


def l1_histogram_distance(samples, tables: StationaryTables, nbins: int = PROBE_BINS) -> float:
    """L1 distance between binned samples and rho; mass outside the support counts fully."""
    edges, probs = probe_bins(tables, nbins)
    samples = np.asarray(samples)
    counts, _ = np.histogram(samples, bins=edges)
    emp = counts / samples.size
    outside = 1.0 - emp.sum()
    return float(np.abs(emp - probs).sum() + outside + (1.0 - probs.sum()))


def convergence_probe(model: WeightModel, init_law, t: float, n: int, rng,
                      tables: StationaryTables | None = None, tag="convergence") -> float:
    """L1 histogram distance between the law of eta(t) (n copies) and rho."""
    if n < 1000:
        raise ValueError("n must be at least 1000")
    tables = tables or build_tables(model)
    values = eta_samples(model, init_law, [t], n, rng, tag=f"{tag}:{init_law}:{t}")[:, 0]
    return l1_histogram_distance(values, tables)


@dataclass
class TailTable:
    t: np.ndarray
    x: np.ndarray
    estimate: np.ndarray  # shape (len(t), len(x))
    n: int

    @property
    def stderr(self) -> np.ndarray:
        p = self.estimate
        return np.sqrt(p * (1.0 - p) / self.n)

    def rows(self):
        se = self.stderr
        for a, t in enumerate(self.t):
            for b, x in enumerate(self.x):
                yield float(t), float(x), float(self.estimate[a, b]), float(se[a, b]), self.n

    def write_csv(self, path) -> None:
        write_probe_csv(self.rows(), path)


def write_probe_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t", "x", "estimate", "stderr", "n"])
        for row in rows:
            out.writerow([repr(v) if isinstance(v, float) else v for v in row])


def tail_probe(model: WeightModel, init_law, t_grid, x_grid, n: int, rng,
               tag="tail") -> TailTable:
    """Empirical P(eta(t) > x) on the grid; one path per replica observed at every t."""
    if n < 1000:
        raise ValueError("n must be at least 1000")
    t_grid = np.sort(np.asarray(t_grid, dtype=float))
    x_grid = np.asarray(x_grid, dtype=float)
    values = eta_samples(model, init_law, t_grid, n, rng, tag=f"{tag}:{init_law}")
    est = (values[:, :, None] > x_grid[None, None, :]).mean(axis=0)
    return TailTable(t_grid, x_grid, est, int(n))
