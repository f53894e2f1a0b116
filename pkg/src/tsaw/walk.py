"""Event-driven simulation of the continuous-time self-repelling walk.

While the walker sits at ``x`` its own local time grows at unit rate, so the
rates of jumping to ``x+1`` and ``x-1`` are ``w(u_+ + s)`` and ``w(u_- + s)``
after ``s`` units of holding, where ``u_± = l(x) - l(x±1)`` at arrival. The
holding time is drawn by inverting the cumulative total hazard against one
Exp(1) variate; the direction is then drawn from the two rates at the jump
instant.

Draw order per event is fixed (one exponential, then one uniform unless the
run stops inside the holding interval) and shared with the compiled batch
kernels, so a :class:`~tsaw.rng.Stream` reproduces a kernel replica exactly.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numba
import numpy as np

from . import rng as rngmod
from .errors import BudgetExhausted, EmptyPath
from .profiles import ProfileRealization
from .weights import WeightModel, k_hold, k_w

DEFAULT_MAX_EVENTS = 10**8

STATUS_OK = 0
STATUS_RANGE = 1
STATUS_EVENTS = 2


@dataclass
class WalkState:
    position: int = 0
    clock: float = 0.0
    local_time: dict = field(default_factory=dict)
    arrival_clock: float = 0.0

    def gaps(self) -> tuple[float, float]:
        """(u_+, u_-) at the current site."""
        lt = self.local_time
        here = lt.get(self.position, 0.0)
        return here - lt.get(self.position + 1, 0.0), here - lt.get(self.position - 1, 0.0)


@dataclass
class WalkTrajectory:
    jump_times: list
    positions: list
    final: WalkState

    def holding_intervals(self):
        """Yield (site, start, end) for every holding period, in order."""
        starts = [0.0] + self.jump_times
        sites = [0] + self.positions
        ends = self.jump_times + [self.final.clock]
        return zip(sites, starts, ends)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["event_index", "time", "position"])
            out.writerow([0, repr(0.0), 0])
            for i, (t, x) in enumerate(zip(self.jump_times, self.positions), start=1):
                out.writerow([i, repr(float(t)), int(x)])


def holding_time(model: WeightModel, up: float, um: float, rng) -> float:
    return model.hold(up, um, rng.exponential())


def jump_direction(model: WeightModel, up: float, um: float, s: float, rng) -> int:
    right = model.w(up + s)
    left = model.w(um + s)
    return 1 if rng.random() * (right + left) < right else -1


def next_event(model: WeightModel, state: WalkState, rng) -> tuple[float, int]:
    """Holding time and direction of the next jump from ``state`` (at arrival)."""
    up, um = state.gaps()
    s = holding_time(model, up, um, rng)
    return s, jump_direction(model, up, um, s, rng)


def _simulate(model, rng, stop_site=None, stop_level=None, t_end=None,
              max_events=DEFAULT_MAX_EVENTS, max_range=None):
    state = WalkState()
    lt = state.local_time
    lt[0] = 0.0
    times: list = []
    positions: list = []
    lo = hi = 0
    events = 0
    while True:
        x = state.position
        up, um = state.gaps()
        s = holding_time(model, up, um, rng)
        here = lt.get(x, 0.0)
        if stop_site is not None and x == stop_site and here + s >= stop_level:
            state.clock += stop_level - here
            lt[x] = stop_level
            break
        if t_end is not None and state.clock + s >= t_end:
            lt[x] = here + (t_end - state.clock)
            state.clock = t_end
            break
        lt[x] = here + s
        state.clock += s
        step = jump_direction(model, up, um, s, rng)
        events += 1
        if events > max_events:
            raise BudgetExhausted(f"more than {max_events} events")
        x += step
        state.position = x
        state.arrival_clock = state.clock
        lt.setdefault(x, 0.0)
        times.append(state.clock)
        positions.append(x)
        lo, hi = min(lo, x), max(hi, x)
        if max_range is not None and hi - lo + 1 > max_range:
            raise BudgetExhausted(f"visited range exceeded {max_range} sites")
    return WalkTrajectory(times, positions, state)


def run_until_inverse_local_time(model: WeightModel, j: int, r: float, rng,
                                 max_events: int = DEFAULT_MAX_EVENTS,
                                 max_range: int | None = None):
    """Run from X(0)=0 until the local time at ``j`` first reaches ``r``.

    Returns ``(T, trajectory)``; the last holding interval at ``j`` is cut at
    the exact instant the local time hits ``r``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    traj = _simulate(model, rng, stop_site=j, stop_level=r,
                     max_events=max_events, max_range=max_range)
    return traj.final.clock, traj


def run_until_time(model: WeightModel, t_end: float, rng,
                   max_events: int = DEFAULT_MAX_EVENTS) -> WalkState:
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if t_end == 0:
        return WalkState(local_time={0: 0.0})
    return _simulate(model, rng, t_end=t_end, max_events=max_events).final


def local_time_profile(trajectory: WalkTrajectory, j: int, r: float) -> ProfileRealization:
    lt = trajectory.final.local_time
    visited = [k for k, v in lt.items() if v > 0.0]
    lam, rho = min(visited), max(visited)
    values = np.array([lt.get(k, 0.0) for k in range(lam, rho + 1)])
    return ProfileRealization(origin=j, height=r, left_end=lam, right_end=rho,
                              values=values, route="direct")


# ---------------------------------------------------------------------------
# edge processes


@dataclass
class EdgeProcessPath:
    """Piecewise-linear (alpha, xi) path of one edge in edge-local time.

    Segment ``i`` covers edge time ``[s[i], s[i+1])`` with constant slope
    ``alpha[i]``; ``t[i]`` is the walk time at which it starts, so the
    inverse time change is ``theta(s) = t[i] + (s - s[i])`` on that segment.
    Consecutive segments may share a sign (the walker left the edge and came
    back on the same side); only sign changes are flips.
    """

    k: int | None
    s: np.ndarray
    xi: np.ndarray
    alpha: np.ndarray
    t: np.ndarray

    def _segment(self, s: float) -> int:
        i = int(np.searchsorted(self.s, s, side="right")) - 1
        return min(max(i, 0), len(self.alpha) - 1)

    def xi_at(self, s: float) -> float:
        i = self._segment(s)
        return float(self.xi[i] + self.alpha[i] * (s - self.s[i]))

    def alpha_at(self, s: float) -> int:
        return int(self.alpha[self._segment(s)])

    def theta(self, s: float) -> float:
        i = self._segment(s)
        return float(self.t[i] + (s - self.s[i]))

    @property
    def duration(self) -> float:
        return float(self.s[-1])

    @property
    def terminal(self) -> tuple[int, float]:
        return int(self.alpha[-1]), float(self.xi[-1])

    @property
    def flips(self) -> np.ndarray:
        change = np.nonzero(self.alpha[1:] != self.alpha[:-1])[0] + 1
        return self.s[change]

    def time_on(self, sign: int) -> float:
        d = np.diff(self.s)
        return float(d[self.alpha == sign].sum())

    def eta(self, sign: int, t: float) -> float:
        """eta_{k,-}(t) = xi(beta_-(t)) for sign -1; eta_{k,+}(t) = -xi(beta_+(t)) for +1.

        ``t`` is occupation time of side ``sign``; at ``t = 0`` this is the
        value at the start of the first stint on that side.
        """
        d = np.diff(self.s)
        used = 0.0
        for i in range(len(self.alpha)):
            if self.alpha[i] != sign or d[i] <= 0.0:
                continue
            if used + d[i] >= t:
                val = self.xi[i] + self.alpha[i] * (t - used)
                return float(val if sign < 0 else -val)
            used += d[i]
        raise ValueError(f"path spends only {used} on side {sign}, asked for {t}")


def extract_edge_processes(trajectory: WalkTrajectory, k: int) -> EdgeProcessPath:
    s_knots = [0.0]
    xi_knots = [0.0]
    alpha = []
    t_start = []
    for site, a, b in trajectory.holding_intervals():
        if site not in (k, k + 1) or b <= a:
            continue
        sign = 1 if site == k + 1 else -1
        d = b - a
        alpha.append(sign)
        t_start.append(a)
        s_knots.append(s_knots[-1] + d)
        xi_knots.append(xi_knots[-1] + sign * d)
    if not alpha:
        raise EmptyPath(f"edge <{k},{k + 1}> never touched")
    return EdgeProcessPath(k=k, s=np.array(s_knots), xi=np.array(xi_knots),
                           alpha=np.array(alpha, dtype=np.int64), t=np.array(t_start))


# ---------------------------------------------------------------------------
# compiled batch kernels


@numba.njit(cache=True)
def _walk_kernel(kind, p1, p2, state, lt, off, stop_site, stop_level, t_end,
                 max_events, max_range):
    """One replica; returns (status, clock, position, lo, hi, events).

    ``lt`` must be zero on entry; the caller clears [lo-1, hi+1] afterwards.
    Mirrors :func:`_simulate` draw for draw.
    """
    x = 0
    clock = 0.0
    lo = 0
    hi = 0
    events = 0
    while True:
        here = lt[x + off]
        up = here - lt[x + 1 + off]
        um = here - lt[x - 1 + off]
        s = k_hold(kind, p1, p2, up, um, rngmod.exponential(state))
        if x == stop_site and here + s >= stop_level:
            clock += stop_level - here
            lt[x + off] = stop_level
            return STATUS_OK, clock, x, lo, hi, events
        if clock + s >= t_end:
            lt[x + off] = here + (t_end - clock)
            return STATUS_OK, t_end, x, lo, hi, events
        lt[x + off] = here + s
        clock += s
        right = k_w(kind, p1, p2, up + s)
        left = k_w(kind, p1, p2, um + s)
        if rngmod.uniform(state) * (right + left) < right:
            x += 1
        else:
            x -= 1
        events += 1
        if events > max_events:
            return STATUS_EVENTS, clock, x, lo, hi, events
        if x < lo:
            lo = x
        if x > hi:
            hi = x
        if hi - lo + 1 > max_range:
            return STATUS_RANGE, clock, x, lo, hi, events


@numba.njit(cache=True)
def _stopped_batch(kind, p1, p2, j, r, master, tag, first, n, max_range,
                   max_events, rec_sites):
    T = np.zeros(n)
    lam = np.zeros(n, dtype=np.int64)
    rho = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    nev = np.zeros(n, dtype=np.int64)
    rec = np.zeros((n, rec_sites.shape[0]))
    off = max_range + 1
    lt = np.zeros(2 * max_range + 3)
    state = np.empty(4, dtype=np.uint64)
    for i in range(n):
        rngmod.derive_state(master, tag, first + i, state)
        st, clock, x, lo, hi, ev = _walk_kernel(kind, p1, p2, state, lt, off, j, r,
                                                np.inf, max_events, max_range)
        status[i] = st
        T[i] = clock
        lam[i] = lo
        rho[i] = hi
        nev[i] = ev
        for m in range(rec_sites.shape[0]):
            k = rec_sites[m]
            if lo <= k <= hi:
                rec[i, m] = lt[k + off]
        lt[lo - 1 + off:hi + 2 + off] = 0.0
    return T, lam, rho, status, nev, rec


@numba.njit(cache=True)
def _timed_batch(kind, p1, p2, t_ends, master, tag, first, max_range, max_events):
    n = t_ends.shape[0]
    pos = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    nev = np.zeros(n, dtype=np.int64)
    off = max_range + 1
    lt = np.zeros(2 * max_range + 3)
    state = np.empty(4, dtype=np.uint64)
    for i in range(n):
        rngmod.derive_state(master, tag, first + i, state)
        if t_ends[i] <= 0.0:
            continue
        st, clock, x, lo, hi, ev = _walk_kernel(kind, p1, p2, state, lt, off, -(1 << 62),
                                                np.inf, t_ends[i], max_events, max_range)
        status[i] = st
        pos[i] = x
        nev[i] = ev
        lt[lo - 1 + off:hi + 2 + off] = 0.0
    return pos, status, nev


@numba.njit(cache=True)
def _exponential_batch(master, tag, first, n, mean):
    out = np.empty(n)
    state = np.empty(4, dtype=np.uint64)
    for i in range(n):
        rngmod.derive_state(master, tag, first + i, state)
        out[i] = mean * rngmod.exponential(state)
    return out


@dataclass
class StoppedBatch:
    """Summary of many direct-route runs stopped at T_{j,r}.

    ``status`` is 0 for complete runs, 1 when the visited range exceeded the
    cap (the run is censored on the event {range > max_range}), 2 when the
    event budget ran out.
    """

    j: int
    r: float
    T: np.ndarray
    left_end: np.ndarray
    right_end: np.ndarray
    status: np.ndarray
    events: np.ndarray
    sites: np.ndarray
    values: np.ndarray

    @property
    def complete(self) -> np.ndarray:
        return self.status == STATUS_OK


def simulate_stopped(model: WeightModel, j: int, r: float, n: int, seed: int,
                     tag="walk-stopped", first: int = 0, max_range: int = 400,
                     max_events: int = DEFAULT_MAX_EVENTS, sites=()) -> StoppedBatch:
    """Run ``n`` independent replicas to T_{j,r}; replica ``i`` uses stream ``first + i``."""
    kind, p1, p2 = model.kernel_params
    rec = np.asarray(sites, dtype=np.int64)
    T, lam, rho, status, nev, vals = _stopped_batch(
        kind, p1, p2, int(j), float(r), np.uint64(seed), np.uint64(rngmod.tag_id(tag)),
        int(first), int(n), int(max_range), int(max_events), rec)
    return StoppedBatch(j, r, T, lam, rho, status, nev, rec, vals)


def simulate_positions(model: WeightModel, t_ends, seed: int, tag="walk-timed",
                       first: int = 0, max_range: int = 100_000,
                       max_events: int = DEFAULT_MAX_EVENTS):
    """Positions X(t_end[i]) of independent replicas; raises if any budget is hit."""
    kind, p1, p2 = model.kernel_params
    pos, status, nev = _timed_batch(kind, p1, p2, np.asarray(t_ends, dtype=float),
                                    np.uint64(seed), np.uint64(rngmod.tag_id(tag)),
                                    int(first), int(max_range), int(max_events))
    if (status != STATUS_OK).any():
        raise BudgetExhausted(f"{int((status != STATUS_OK).sum())} replicas hit the budget")
    return pos, nev


def exponential_times(n: int, mean: float, seed: int, tag="exp-times", first: int = 0):
    return _exponential_batch(np.uint64(seed), np.uint64(rngmod.tag_id(tag)), int(first), int(n), float(mean))
