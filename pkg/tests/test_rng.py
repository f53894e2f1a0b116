import math

import numpy as np
import pytest
from scipy import stats

from tsaw.rng import ScriptedRNG, Stream, tag_id


def test_streams_are_keyed():
    a = [Stream(1, 0, "x").random() for _ in range(3)]
    assert a == [Stream(1, 0, "x").random() for _ in range(3)]
    s = Stream(1, 0, "x")
    first = [s.random() for _ in range(5)]
    t = Stream(1, 0, "x")
    assert first == [t.random() for _ in range(5)]
    assert Stream(1, 1, "x").random() != Stream(1, 0, "x").random()
    assert Stream(1, 0, "y").random() != Stream(1, 0, "x").random()
    assert Stream(2, 0, "x").random() != Stream(1, 0, "x").random()
    assert tag_id("x") == tag_id("x") and tag_id(7) == 7


def test_spawn_changes_index_only():
    s = Stream(9, 0, "t").spawn(4)
    assert (s.master_seed, s.index, s.tag) == (9, 4, tag_id("t"))


def test_marginals():
    s = Stream(123, tag="marg")
    u = np.array([s.random() for _ in range(20_000)])
    e = np.array([s.exponential() for _ in range(20_000)])
    z = np.array([s.normal() for _ in range(20_000)])
    assert (u > 0).all() and (u < 1).all()
    assert stats.kstest(u, "uniform").pvalue > 1e-3
    assert stats.kstest(e, "expon").pvalue > 1e-3
    assert stats.kstest(z, "norm").pvalue > 1e-3


def test_replicas_uncorrelated():
    x = np.array([Stream(5, i, "c").random() for i in range(5000)])
    y = np.array([Stream(5, i + 1, "c").random() for i in range(5000)])
    assert abs(np.corrcoef(x, y)[0, 1]) < 4 / math.sqrt(5000)


def test_scripted_rng():
    r = ScriptedRNG(exponentials=[1.0, 2.0], uniforms=[0.25])
    assert r.exponential() == 1.0 and r.exponential(3.0) == 6.0
    assert r.random() == 0.25
    with pytest.raises(IndexError):
        r.random()
