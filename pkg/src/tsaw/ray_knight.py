"""Ray-Knight construction of stopped local-time profiles.

The profile at the inverse local time T_{j,r} is a pair of Markov chains on
the half-lines started from ``Λ(j) = r``:

    Λ(k+1) = Λ(k) + eta_{k,-}(Λ(k))      k >= j
    Λ(k-1) = Λ(k) + eta_{k-1,+}(Λ(k))    k <= j

with independent eta processes per edge. ``eta_{k,-}`` starts at 0 for
``k >= 0`` and at a draw from Q(0, .) for ``k < 0``; ``eta_{k,+}`` the other
way round. Each chain is absorbed at its first zero outside
``[min(0, j), max(0, j)]``. A zero is produced exactly (no threshold): from a
0 start with no jump, eta returns ``-Λ(k)`` and the sum cancels in floating
point.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numba
import numpy as np

from . import rng as rngmod
from .auxiliary import INIT_DELTA0, INIT_Q0, _key, eta_evolve, eta_value
from .errors import BudgetExhausted
from .profiles import ProfileRealization
from .weights import WeightModel, k_invert

STATUS_RANGE = 1
STATUS_RIGHT = 2
STATUS_LEFT = 4
STATUS_AREA = 8


def _forward_init(k: int) -> str:
    return INIT_DELTA0 if k >= 0 else INIT_Q0


def _backward_init(k: int) -> str:
    # law of eta_{k,+}
    return INIT_Q0 if k >= 0 else INIT_DELTA0


def build_profile(model: WeightModel, j: int, r: float, rng,
                  max_sites: int | None = None) -> ProfileRealization:
    """One profile Λ_{j,r} by the recursion; forward chain first, then backward."""
    if not r > 0:
        raise ValueError("r must be positive")
    inner_lo, inner_hi = min(0, j), max(0, j)
    inner_zeros = 0

    def chain(step, init_of):
        nonlocal inner_zeros
        out = []
        k, level = j, float(r)
        while True:
            if max_sites is not None and len(out) >= max_sites:
                raise BudgetExhausted(f"profile side longer than {max_sites} sites")
            edge = k if step > 0 else k - 1
            nxt = level + eta_evolve(model, init_of(edge), level, rng)
            k += step
            if nxt <= 0.0:
                if inner_lo <= k <= inner_hi:
                    inner_zeros += 1
                    nxt = 0.0
                else:
                    return out
            out.append(nxt)
            level = nxt

    right = chain(1, _forward_init)
    left = chain(-1, _backward_init)
    values = np.array(left[::-1] + [float(r)] + right)
    return ProfileRealization(origin=j, height=float(r), left_end=j - len(left),
                              right_end=j + len(right), values=values, route="ray_knight",
                              flags={"inner_zeros": inner_zeros})


def total_time(profile: ProfileRealization) -> float:
    return float(np.sum(profile.values))


@dataclass
class RescaledProfile:
    """y -> Λ(floor(A y)) / (sigma sqrt(A)) on the grid y = k / A."""

    A: float
    sigma: float
    y: np.ndarray
    value: np.ndarray
    left: float
    right: float

    def __call__(self, y) -> np.ndarray:
        k = np.floor(np.asarray(y, dtype=float) * self.A)
        idx = np.round(k - self.y[0] * self.A).astype(int)
        inside = (idx >= 0) & (idx < self.value.size)
        out = np.zeros(np.shape(k))
        out[inside] = self.value[idx[inside]]
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["y", "value"])
            for a, b in zip(self.y, self.value):
                out.writerow([repr(float(a)), repr(float(b))])


def rescale_profile(profile: ProfileRealization, A: float, sigma: float) -> RescaledProfile:
    if A < 1:
        raise ValueError("A must be at least 1")
    scale = sigma * np.sqrt(A)
    return RescaledProfile(A=A, sigma=sigma, y=profile.sites / A, value=profile.values / scale,
                           left=profile.left_end / A, right=profile.right_end / A)


# ---------------------------------------------------------------------------
# compiled batch


@numba.njit(cache=True)
def _chain(kind, p1, p2, j, r, step, state, buf, off, cap_site, range_lo, range_cap,
           area, area_cap):
    """Run one side. Returns (last positive site, status, area, inner zeros)."""
    inner_lo = min(0, j)
    inner_hi = max(0, j)
    k = j
    level = r
    zeros = 0
    while True:
        edge = k if step > 0 else k - 1
        if step > 0:
            q0 = edge < 0
        else:
            q0 = edge >= 0
        u = 0.0
        if q0:
            u = k_invert(kind, p1, p2, 0.0, rngmod.exponential(state))
        nxt = level + eta_value(kind, p1, p2, u, level, state)
        nk = k + step
        if nxt <= 0.0:
            if inner_lo <= nk <= inner_hi:
                zeros += 1
                nxt = 0.0
            else:
                return k, 0, area, zeros
        if (step > 0 and nk > cap_site) or (step < 0 and nk < cap_site):
            return k, STATUS_RIGHT if step > 0 else STATUS_LEFT, area, zeros
        if step > 0:
            span = nk - range_lo + 1
        else:
            span = range_lo - nk + 1
        if span > range_cap:
            return k, STATUS_RANGE, area, zeros
        area += nxt
        if area > area_cap:
            return k, STATUS_AREA, area, zeros
        buf[nk + off] = nxt
        k = nk
        level = nxt


@numba.njit(cache=True)
def _rk_batch(kind, p1, p2, j, r, master, tag, first, n, left_cap, right_cap,
              range_cap, area_cap, rec_sites):
    lam = np.zeros(n, dtype=np.int64)
    rho = np.zeros(n, dtype=np.int64)
    T = np.zeros(n)
    status = np.zeros(n, dtype=np.int64)
    zeros = np.zeros(n, dtype=np.int64)
    rec = np.zeros((n, rec_sites.shape[0]))
    off = -left_cap + 1
    buf = np.zeros(right_cap - left_cap + 3)
    state = np.empty(4, dtype=np.uint64)
    for i in range(n):
        rngmod.derive_state(master, tag, first + i, state)
        buf[j + off] = r
        right, st, area, z = _chain(kind, p1, p2, j, r, 1, state, buf, off, right_cap,
                                    min(0, j), range_cap, r, area_cap)
        zeros[i] = z
        left = j
        if st == 0 or st == STATUS_RIGHT:
            # the backward side still runs when only the right cap was hit
            left, st2, area, z = _chain(kind, p1, p2, j, r, -1, state, buf, off, left_cap,
                                        right, range_cap, area, area_cap)
            st |= st2
            zeros[i] += z
        lam[i] = left
        rho[i] = right
        T[i] = area
        status[i] = st
        for m in range(rec_sites.shape[0]):
            s = rec_sites[m]
            if left <= s <= right:
                rec[i, m] = buf[s + off]
        buf[left + off:right + off + 1] = 0.0
    return lam, rho, T, status, zeros, rec


@dataclass
class ProfileBatch:
    """Summary of many ray_knight profiles.

    ``status`` is a bitmask: 1 visited range over ``max_range``, 2 right end
    beyond ``right_cap``, 4 left end below ``left_cap``, 8 total time over
    ``area_cap``. A set bit means the corresponding quantity is censored
    (known only to exceed its cap).
    """

    j: int
    r: float
    left_end: np.ndarray
    right_end: np.ndarray
    T: np.ndarray
    status: np.ndarray
    inner_zeros: np.ndarray
    sites: np.ndarray
    values: np.ndarray

    @property
    def complete(self) -> np.ndarray:
        return self.status == 0


def build_profiles(model: WeightModel, j: int, r: float, n: int, rng, tag="ray-knight",
                   left_cap: int = -100_000, right_cap: int = 100_000,
                   max_range: int | None = None, area_cap: float = np.inf,
                   sites=()) -> ProfileBatch:
    """``n`` independent profiles; replica ``i`` matches ``build_profile`` with stream i."""
    kind, p1, p2 = model.kernel_params
    master, tg, first = _key(rng, tag)
    if not left_cap <= min(0, j) <= max(0, j) <= right_cap:
        raise ValueError("caps must enclose [min(0, j), max(0, j)]")
    rec = np.asarray(sites, dtype=np.int64)
    rng_cap = max_range if max_range is not None else right_cap - left_cap + 1
    lam, rho, T, status, zeros, vals = _rk_batch(
        kind, p1, p2, int(j), float(r), master, tg, int(first), int(n), int(left_cap),
        int(right_cap), int(rng_cap), float(area_cap), rec)
    return ProfileBatch(j, r, lam, rho, T, status, zeros, rec, vals)
