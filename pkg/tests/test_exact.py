import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freezetag import exact
from freezetag import geometry as geo
from freezetag import instances as I
from freezetag.schedule import makespan, tree_to_schedule, verify


@pytest.mark.parametrize(
    "inst,expected,tol",
    [
        (I.paper_instance("fig5-n5"), 3.530, 0.005),
        (I.paper_instance("fig5-n7"), 3.498, 0.005),
        (I.gen_equally_spaced_circle(5), 3.351, 0.001),
        (I.gen_equally_spaced_circle(7), 3.431, 0.001),
    ],
    ids=["fig5-n5", "fig5-n7", "circle-5", "circle-7"],
)
def test_reference_optima(inst, expected, tol):
    value, _ = exact.optimal_makespan(inst)
    assert abs(value - expected) <= tol


def test_forced_chain():
    inst = I.Instance("disk_l2", (0, 0), [(1, 0), (-1, 0)])
    value, tree = exact.optimal_makespan(inst)
    assert value == 3.0
    assert tree.parent in ((0, 1), (2, 0))


def test_empty_and_single():
    assert exact.optimal_makespan(I.gen_random("disk_l2", 0, 1))[0] == 0.0
    inst = I.Instance("disk_l2", (0, 0), [(0.3, -0.4)])
    assert exact.optimal_makespan(inst)[0] == pytest.approx(0.5, abs=1e-15)
    assert exact.exhaustive_tree_enumeration(inst) == pytest.approx(0.5, abs=1e-15)


def test_cap_refuses():
    inst = I.gen_random("disk_l2", 9, 1)
    with pytest.raises(exact.CapExceeded):
        exact.optimal_makespan(inst, n_cap=8)
    with pytest.raises(exact.CapExceeded):
        exact.exhaustive_tree_enumeration(inst)


def test_raised_cap_logs_memory(caplog):
    inst = I.gen_random("disk_l2", 3, 1)
    with caplog.at_level("WARNING"):
        exact.optimal_makespan(inst, n_cap=18)
    assert "MiB" in caplog.text


def _brute_force_parents(points, metric):
    """Third oracle: every parent function, filtered to valid trees."""
    n = len(points) - 1
    best = math.inf
    for parent in itertools.product(range(n + 1), repeat=n):
        if any(parent[i] == i + 1 for i in range(n)):
            continue
        kids = [0] * (n + 1)
        for p in parent:
            kids[p] += 1
        if kids[0] != 1 or max(kids[1:], default=0) > 2:
            continue
        times = {0: 0.0}
        pending = set(range(1, n + 1))
        while pending:
            ready = [v for v in pending if parent[v - 1] in times]
            if not ready:
                break
            for v in ready:
                times[v] = times[parent[v - 1]] + geo.unchecked_dist(metric, points[parent[v - 1]], points[v])
                pending.discard(v)
        if pending:
            continue
        best = min(best, max(times.values()))
    return best


@pytest.mark.parametrize("seed", range(6))
def test_three_oracles_agree(seed):
    inst = I.gen_random("disk_l2", 4, seed)
    pts = [tuple(p) for p in inst.positions]
    dp = exact.optimal_makespan(inst)[0]
    assert dp == pytest.approx(_brute_force_parents(pts, inst.metric), abs=1e-12)
    assert dp == pytest.approx(exact.exhaustive_tree_enumeration(inst), abs=1e-12)


@pytest.mark.parametrize("space", I.SPACES)
def test_dp_vs_enumeration_spaces(space):
    for seed in range(15):
        inst = I.gen_random(space, 1 + seed % 6, seed)
        a = exact.optimal_makespan(inst)[0]
        b = exact.exhaustive_tree_enumeration(inst)
        c = exact.exhaustive_tree_enumeration(inst, prune=False)
        assert a == pytest.approx(b, abs=1e-9) and b == c


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_tree_realizes_value(n, seed):
    inst = I.gen_random("disk_l2", n, seed)
    value, tree = exact.optimal_makespan(inst)
    s = tree_to_schedule(tree, inst.positions, inst.metric)
    assert makespan(s) == value
    assert verify(inst, s) == []


@given(st.integers(1, 7), st.integers(0, 2**32 - 1), st.floats(0.05, 20.0))
@settings(max_examples=30)
def test_scale_equivariance(n, seed, scale):
    inst = I.gen_random("disk_l2", n, seed)
    base = exact.optimal_makespan(inst)[0]
    scaled = exact.optimal_makespan_points(inst.positions * scale, geo.DISK_L2)[0]
    assert scaled == pytest.approx(base * scale, rel=1e-12)


def test_duplicate_robot_never_hurts():
    # removing a sleeper can hurt (it may be a relay), but a twin is a free helper
    inst = I.gen_random("disk_l2", 7, 3)
    pos = inst.positions
    base = exact.optimal_makespan_points(pos, geo.DISK_L2)[0]
    for dup in range(1, 8):
        more = np.vstack([pos, pos[dup]])
        assert exact.optimal_makespan_points(more, geo.DISK_L2)[0] <= base + 1e-12


def test_memory_estimate_grows():
    assert exact.memory_estimate(16) > exact.memory_estimate(10) > 0
