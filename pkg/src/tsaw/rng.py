"""Keyed xoshiro256** streams.

Every replica draws from its own generator whose state is derived from
``(master_seed, stream_tag, replica_index)`` by a splitmix64 hash chain, so
results do not depend on execution order. The scalar draw functions are
numba-compiled and are shared by the batch kernels and by :class:`Stream`,
which makes Python-level reference simulations consume exactly the same
numbers as the compiled kernels.
"""
from __future__ import annotations

import math
import zlib

import numba
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi


@numba.njit(cache=True)
def _splitmix(x):
    z = x + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@numba.njit(cache=True)
def derive_state(master, tag, index, state):
    """Fill ``state`` (uint64[4]) with the stream keyed by (master, tag, index)."""
    h = _splitmix(np.uint64(master))
    h = _splitmix(h ^ np.uint64(tag))
    h = _splitmix(h ^ np.uint64(index))
    for i in range(4):
        h = _splitmix(h)
        state[i] = h


@numba.njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@numba.njit(cache=True)
def uniform(s):
    # open interval (0, 1): never returns 0, so -log(u) is finite
    return (float(next_u64(s) >> np.uint64(11)) + 0.5) * _TWO_M53


@numba.njit(cache=True)
def exponential(s):
    return -math.log(uniform(s))


@numba.njit(cache=True)
def normal(s):
    u1 = uniform(s)
    u2 = uniform(s)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


def tag_id(tag: str | int) -> int:
    """Stable 32-bit identifier for a stream tag."""
    if isinstance(tag, (int, np.integer)):
        return int(tag)
    return zlib.crc32(tag.encode("utf-8"))


class Stream:
    """Python handle on one keyed stream.

    Exposes the subset of the ``numpy.random.Generator`` interface the
    simulators use (``random``, ``exponential``, ``normal``), so either can be
    passed wherever an ``rng`` is expected.
    """

    def __init__(self, master_seed: int, index: int = 0, tag: str | int = "default"):
        self.master_seed = int(master_seed)
        self.index = int(index)
        self.tag = tag_id(tag)
        self.state = np.empty(4, dtype=np.uint64)
        derive_state(self.master_seed, self.tag, self.index, self.state)

    def random(self) -> float:
        return uniform(self.state)

    def exponential(self, scale: float = 1.0) -> float:
        return scale * exponential(self.state)

    def normal(self, loc: float = 0.0, scale: float = 1.0) -> float:
        return loc + scale * normal(self.state)

    def spawn(self, index: int, tag: str | int | None = None) -> "Stream":
        return Stream(self.master_seed, index, self.tag if tag is None else tag)


class ScriptedRNG:
    """Deterministic stub replaying fixed draws, for pinning worked examples.

    ``exponentials`` feed ``exponential()`` (scaled), ``uniforms`` feed
    ``random()``. Running out of scripted values is an error.
    """

    def __init__(self, exponentials=(), uniforms=(), normals=()):
        self._exp = list(exponentials)
        self._uni = list(uniforms)
        self._nrm = list(normals)

    def exponential(self, scale: float = 1.0) -> float:
        if not self._exp:
            raise IndexError("no scripted exponential draws left")
        return scale * self._exp.pop(0)

    def random(self) -> float:
        if not self._uni:
            raise IndexError("no scripted uniform draws left")
        return self._uni.pop(0)

    def normal(self, loc: float = 0.0, scale: float = 1.0) -> float:
        if not self._nrm:
            raise IndexError("no scripted normal draws left")
        return loc + scale * self._nrm.pop(0)
