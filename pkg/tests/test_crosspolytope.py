import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freezetag import crosspolytope as C
from freezetag import geometry as geo
from freezetag import instances as I
from freezetag.schedule import ScheduleBuilder, verify, verify_positions


def l1_ball(rng, m, center=(0, 0, 0), r=1.0):
    # uniform in the octahedron: exponential trick with random signs
    e = rng.exponential(size=(m, 4))
    pts = e[:, :3] / e.sum(axis=1, keepdims=True)
    pts *= rng.choice([-1.0, 1.0], size=(m, 3))
    return np.asarray(center) + r * pts


@pytest.mark.parametrize("r", [1.0, 0.37])
def test_region_examples(r):
    ball = C.CrossPolytope((0.1, -0.2, 0.3), r)
    c = np.array(ball.center)
    assert C.region14_of(c + (0.6 * r, 0, 0), ball).name == "subx+"
    assert C.region14_of(c + (0.3 * r, 0.3 * r, 0.3 * r), ball).name == "pyr+++"
    assert C.region14_of(c, ball).name == "subx+"


def test_pyramid_example_is_outside_all_subs():
    p = np.array((0.3, 0.3, 0.3))
    for region in C.REGIONS[:6]:
        sub = region.polytope(C.UNIT)
        assert np.abs(p - sub.center).sum() > sub.radius


def test_region_outside_is_error():
    with pytest.raises(C.PolytopeError):
        C.region14_of((0.6, 0.6, 0.0))


def test_region_diameters_are_half():
    for region in C.REGIONS:
        v = np.array(region.vertices(C.UNIT))
        diam = max(np.abs(a - b).sum() for a in v for b in v)
        assert diam == pytest.approx(1.0, abs=1e-15)


def test_partition_bulk():
    rng = np.random.default_rng(21)
    pts = l1_ball(rng, 100_000)
    idx = C.region14_indices(pts)
    assert set(idx.tolist()) == set(range(14))
    for k in range(0, 100_000, 97):
        region = C.region14_of(pts[k])
        assert region.index == idx[k]
        assert region.contains(pts[k], C.UNIT)
    # sub-polytopes hold 6/8 of the volume, pyramids 2/8
    frac_subs = np.mean(idx < 6)
    assert abs(frac_subs - 0.75) < 0.01


@given(st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda p: sum(map(abs, p)) <= 1))
def test_region_contains_point(p):
    r = C.region14_of(p)
    assert r.contains(p, C.UNIT)
    assert C.region14_indices([p])[0] == r.index


def test_covering_examples():
    k = C.covering6_index((0.5, 0.2, 0.1))
    assert C.cover_center(k) == pytest.approx((1 / 3, 0, 0))
    assert geo.dist(geo.BALL_L1, (0.5, 0.2, 0.1), C.cover_center(k)) == pytest.approx(1 / 6 + 0.3, abs=1e-15)
    k = C.covering6_index((-1.0, 0.0, 0.0))
    assert C.cover_center(k) == pytest.approx((-1 / 3, 0, 0))
    assert geo.dist(geo.BALL_L1, (-1, 0, 0), C.cover_center(k)) == pytest.approx(2 / 3, abs=1e-15)
    assert C.cover_center(C.covering6_index((0, 0, 0))) == pytest.approx((1 / 3, 0, 0))


def test_covering_bulk():
    rng = np.random.default_rng(5)
    pts = l1_ball(rng, 1_000_000)
    idx = C.covering6_indices(pts)
    centers = np.array([C.cover_center(k) for k in range(6)])
    d = np.abs(pts - centers[idx]).sum(axis=1)
    assert d.max() <= 2 / 3 + 1e-12
    for k in range(0, 1_000_000, 50_021):
        assert C.covering6_index(pts[k]) == idx[k]


def test_bound_closed_form():
    assert C.BOUND(2.0) == pytest.approx(13.0, abs=1e-12)
    assert C.BOUND.partial_sum(2.0, 200) == pytest.approx(13.0, abs=1e-12)
    assert C.BOUND.step(2.0) == pytest.approx(C.BOUND(2.0), abs=1e-12)
    assert C.crosspolytope_bound(0.5) == pytest.approx(6.5)


# doubling -------------------------------------------------------------------


def test_doubling_single_target():
    s, elapsed = C.doubling_schedule([(0, 0, 0)], [(0.5, 0.25, 0.25)], 1.0)
    assert elapsed == pytest.approx(1.0, abs=1e-15)


def test_doubling_127_within_13():
    rng = np.random.default_rng(1)
    s, elapsed = C.doubling_schedule([(0, 0, 0)], l1_ball(rng, 127), 1.0)
    assert elapsed <= 13.0
    assert elapsed <= C.doubling_time_bound(1, 127, 1.0) + 1e-12


def test_doubling_two_awake_one_round():
    s, elapsed = C.doubling_schedule([(0, 0, 0), (0, 0, 0)], [(0.9, 0, 0), (0, -0.8, 0.1)], 1.0)
    assert elapsed <= 2.0 and elapsed == pytest.approx(0.9)
    assert len(s.wake_events) == 2
    assert {e.waker_id for e in s.wake_events} == {0, 1}


def test_doubling_precondition():
    with pytest.raises(C.PolytopeError):
        C.doubling_schedule([(0, 0, 0)], [(3.0, 0, 0)], 1.0)


@given(st.integers(1, 4), st.integers(0, 60), st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_doubling_bound_property(a, s, seed):
    rng = np.random.default_rng(seed)
    awake = l1_ball(rng, a, r=0.5)
    asleep = l1_ball(rng, s, r=0.5)
    _, elapsed = C.doubling_schedule(awake, asleep, 0.5)
    assert elapsed <= C.doubling_time_bound(a, s, 0.5) + 1e-12


# wake_seven ------------------------------------------------------------------


def _seven(pts, ball=C.UNIT):
    pos = np.vstack([[ball.center], pts])
    b = ScheduleBuilder(pos, geo.BALL_L1)
    info = C.wake_seven(b, 0, ball, range(1, len(pos)))
    return b, info, pos


def test_wake_seven_pigeonhole_extreme():
    rng = np.random.default_rng(2)
    sub = C.REGIONS[3].polytope(C.UNIT)  # y-
    pts = l1_ball(rng, 128, sub.center, sub.radius * 0.999)
    _, info, _ = _seven(pts)
    assert info["region"] == "suby-" and info["count"] == 128


def test_wake_seven_random_200():
    rng = np.random.default_rng(9)
    pts = l1_ball(rng, 200)
    b, info, pos = _seven(pts)
    # recount: first region in enumeration order whose own membership test accepts the point
    owner = [next(r.index for r in C.REGIONS if r.contains(p, C.UNIT, tol=0)) for p in pts]
    counts = np.bincount(owner, minlength=14)
    assert info["count"] == max(counts) >= math.ceil(200 / 14)
    assert len(info["awake"]) == 8
    assert info["elapsed"] <= 3.0 + 1e-9
    s = b.build()
    bad = verify_positions(pos, geo.BALL_L1, s)
    assert bad and {v.rule for v in bad} == {"unwoken-robot"}


def test_wake_seven_needs_128():
    rng = np.random.default_rng(3)
    with pytest.raises(C.PolytopeError):
        _seven(l1_ball(rng, 127))


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 1.0))
@settings(max_examples=20, deadline=None)
def test_wake_seven_elapsed_property(seed, r):
    rng = np.random.default_rng(seed)
    ball = C.CrossPolytope((0, 0, 0), r)
    _, info, _ = _seven(l1_ball(rng, 130, r=r), ball)
    assert info["elapsed"] <= 3 * r + 1e-9


# strategy -------------------------------------------------------------------


def test_strategy_single():
    inst = I.Instance("ball_l1_r3", (0, 0, 0), [(0.3, -0.2, 0.2)])
    _, rep = C.crosspolytope_strategy(inst)
    assert rep.makespan == pytest.approx(0.7, abs=1e-15)


def test_strategy_empty():
    _, rep = C.crosspolytope_strategy(I.gen_random("ball_l1_r3", 0, 0))
    assert rep.makespan == 0.0


@pytest.mark.parametrize("n", [127, 2000])
def test_strategy_bulk(n):
    inst = I.gen_random("ball_l1_r3", n, 4)
    s, rep = C.crosspolytope_strategy(inst)
    assert rep.makespan <= 13.0
    assert verify(inst, s) == []
    if n == 2000:
        assert rep.details["depth"] >= 1
        by_depth = dict(rep.details["radius_by_depth"])
        for d in range(1, rep.details["depth"] + 1):
            assert by_depth[d] == pytest.approx(by_depth[d - 1] * 2 / 3, rel=1e-15)


def test_strategy_rejects_disk():
    with pytest.raises(ValueError):
        C.crosspolytope_strategy(I.gen_random("disk_l2", 3, 1))
