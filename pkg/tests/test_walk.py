import math

import numpy as np
import pytest

from tsaw.errors import BudgetExhausted, EmptyPath
from tsaw.rng import ScriptedRNG, Stream
from tsaw.walk import (extract_edge_processes, holding_time, jump_direction,
                       local_time_profile, run_until_inverse_local_time, run_until_time,
                       simulate_positions, simulate_stopped, WalkState, _simulate)
from tsaw.weights import Exponential, StepTwoLevel

STEP = StepTwoLevel(1.0, 2.0)
EXP1 = Exponential(1.0)


def test_holding_examples():
    assert holding_time(STEP, 0.0, 0.0, ScriptedRNG(exponentials=[1.0])) == pytest.approx(0.25)
    assert holding_time(EXP1, 0.0, 0.0, ScriptedRNG(exponentials=[2.0])) == pytest.approx(math.log(2))


def test_direction_is_fair_for_equal_gaps():
    rng = Stream(5, tag="dir")
    steps = [jump_direction(EXP1, 0.3, 0.3, 0.7, rng) for _ in range(20_000)]
    assert abs(np.mean(steps)) < 4 * math.sqrt(1 / 20_000)


def test_direction_favours_the_less_visited_side():
    # u_+ > u_-: x+1 carries less local time, so its rate w(u_+) is the larger one
    rng = ScriptedRNG(uniforms=[0.6])
    assert jump_direction(STEP, 1.0, -1.0, 0.0, rng) == 1


def test_inverse_local_time_stops_exactly():
    for seed in range(20):
        T, traj = run_until_inverse_local_time(EXP1, 0, 1.3, Stream(seed, tag="t"))
        lt = traj.final.local_time
        assert lt[0] == 1.3
        assert sum(lt.values()) == pytest.approx(T, rel=1e-9)


def test_intermediate_sites_visited():
    for seed in range(10):
        _, traj = run_until_inverse_local_time(STEP, 2, 1.0, Stream(seed))
        assert {0, 1, 2} <= set([0] + traj.positions)


def test_profile_examples():
    T, traj = run_until_inverse_local_time(STEP, -2, 0.8, Stream(7))
    prof = local_time_profile(traj, -2, 0.8)
    assert prof[-2] == 0.8
    assert prof[prof.left_end - 1] == 0.0 and prof[prof.right_end + 1] == 0.0
    assert prof.values.sum() == pytest.approx(T, rel=1e-9)
    assert (prof.values > 0).all()


def test_no_jump_event_probability():
    # the event is decided in the first holding period, so range-censored runs
    # simply count as misses
    n = 10_000
    batch = simulate_stopped(STEP, 0, 0.5, n, seed=11, max_range=50)
    hits = int((batch.T == 0.5).sum())
    p = math.exp(-2)
    assert abs(hits - n * p) < 3 * math.sqrt(n * p * (1 - p))


def test_run_until_time_examples():
    assert run_until_time(STEP, 0.0, Stream(1)).position == 0
    state = run_until_time(STEP, 0.1, ScriptedRNG(exponentials=[1.0]))
    assert state.position == 0 and state.clock == 0.1
    state = run_until_time(EXP1, 37.5, Stream(3))
    assert sum(state.local_time.values()) == pytest.approx(37.5, rel=1e-9)


def test_conservation_over_many_events():
    traj = _simulate(STEP, Stream(99, tag="long"), t_end=2000.0)
    assert len(traj.positions) > 1000
    occupied = {}
    for site, a, b in traj.holding_intervals():
        occupied[site] = occupied.get(site, 0.0) + (b - a)
        assert sum(occupied.values()) == pytest.approx(b, rel=1e-9)
    assert np.all(np.abs(np.diff([0] + traj.positions)) == 1)
    assert occupied == pytest.approx(traj.final.local_time)


def test_edge_process_examples():
    for k, j in ((0, 3), (1, 3), (-2, -3)):
        T, traj = run_until_inverse_local_time(STEP, j, 1.5, Stream(k + 10))
        path = extract_edge_processes(traj, k)
        assert path.xi[0] == 0.0
        assert path.alpha[0] == (-1 if k >= 0 else 1)
        # slope alpha on every segment
        assert np.allclose(np.diff(path.xi), path.alpha * np.diff(path.s))
        lt = traj.final.local_time
        assert path.terminal[1] == pytest.approx(lt.get(k + 1, 0.0) - lt.get(k, 0.0), abs=1e-9)


def test_edge_process_untouched_edge():
    _, traj = run_until_inverse_local_time(STEP, 0, 0.1, ScriptedRNG(exponentials=[1.0]))
    with pytest.raises(EmptyPath):
        extract_edge_processes(traj, 5)


def test_kernel_matches_reference_stream_by_stream():
    batch = simulate_stopped(EXP1, 2, 1.0, 30, seed=4, tag="cmp", max_range=60, sites=[0, 1, 2, 3])
    assert batch.complete.sum() >= 10
    for i in np.nonzero(batch.complete)[0]:
        T, traj = run_until_inverse_local_time(EXP1, 2, 1.0, Stream(4, int(i), tag="cmp"))
        assert batch.T[i] == T
        prof = local_time_profile(traj, 2, 1.0)
        assert batch.left_end[i] == prof.left_end and batch.right_end[i] == prof.right_end
        assert list(batch.values[i]) == [prof[k] for k in (0, 1, 2, 3)]


def test_range_cap_censors():
    batch = simulate_stopped(STEP, 0, 50.0, 20, seed=1, max_range=10)
    assert (batch.status == 1).all()
    with pytest.raises(BudgetExhausted):
        run_until_inverse_local_time(STEP, 0, 50.0, Stream(1), max_range=10)


def test_positions_budget():
    with pytest.raises(BudgetExhausted):
        simulate_positions(STEP, [1e4], seed=1, max_events=10)
    pos, ev = simulate_positions(STEP, [0.0, 5.0], seed=1)
    assert pos[0] == 0


def test_gaps():
    s = WalkState(position=1, local_time={0: 2.0, 1: 0.5})
    assert s.gaps() == (0.5, -1.5)
