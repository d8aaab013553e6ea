"""Acceptance criteria 1-10, each at its stated scale and tolerance.

Each test prints one PASS/FAIL line (also collected in the terminal summary).
Run on their own with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time

import numpy as np
import pytest

from freezetag import crosspolytope as C
from freezetag import disk as D
from freezetag import exact
from freezetag import instances as I
from freezetag import sphere as S
from freezetag.cli import main
from freezetag.schedule import verify


def _seeds(tag, count):
    return [int(s) for s in np.random.SeedSequence(tag).generate_state(count)]


def test_criterion_1_exact_regression(criterion):
    cases = [
        ("fig5-n5", I.paper_instance("fig5-n5"), 3.530, 0.005),
        ("fig5-n7", I.paper_instance("fig5-n7"), 3.498, 0.005),
        ("circle-5", I.gen_equally_spaced_circle(5), 3.351, 0.001),
        ("circle-7", I.gen_equally_spaced_circle(7), 3.431, 0.001),
    ]
    ok, parts = True, []
    for name, inst, want, tol in cases:
        t = time.perf_counter()
        got, _ = exact.optimal_makespan(inst)
        dt = time.perf_counter() - t
        good = abs(got - want) <= tol and dt < 1.0
        ok &= good
        parts.append(f"{name}={got:.4f}({dt:.2f}s)")
    assert criterion(1, ok, "exact optima " + " ".join(parts))


def test_criterion_2_dp_vs_enumeration(criterion):
    t = time.perf_counter()
    worst, count = 0.0, 0
    for k, seed in enumerate(_seeds(2, 500)):
        space = I.SPACES[k % len(I.SPACES)]
        inst = I.gen_random(space, 1 + k % 7, seed)
        a = exact.optimal_makespan(inst)[0]
        b = exact.exhaustive_tree_enumeration(inst)
        worst = max(worst, abs(a - b))
        count += 1
    dt = time.perf_counter() - t
    ok = worst <= 1e-9 and dt < 60 and count == 500
    assert criterion(2, ok, f"{count} instances, max |DP - enumeration| = {worst:.2e}, {dt:.1f}s")


def test_criterion_3_combined_bound(criterion):
    t = time.perf_counter()
    worst, bad = 0.0, []
    for k, seed in enumerate(_seeds(3, 10_000)):
        inst = I.gen_random("disk_l2", 1 + k % 100, seed, on_boundary=k % 4 == 3)
        s, rep = D.combined_strategy(inst)
        if rep.makespan > D.COMBINED_BOUND or verify(inst, s):
            bad.append(seed)
        worst = max(worst, rep.makespan)
    dt = time.perf_counter() - t
    ok = not bad and dt < 300
    assert criterion(3, ok, f"10^4 disk instances, max makespan {worst:.4f} <= 5.4162, failures {len(bad)}, {dt:.1f}s")


def test_criterion_4_arc_and_ring_invariants(criterion):
    arc_bad = ring_bad = 0
    arc_worst, ring_worst = 0.0, -math.inf
    for k, seed in enumerate(_seeds(4, 1000)):
        inst = I.gen_random("disk_l2", 1 + k % 100, seed, on_boundary=k % 3 == 2)
        s, rep = D.arc_strategy(inst)
        pos = inst.positions
        for tr in rep.traces:
            # recompute the path length from the tree nodes
            length = sum(math.dist(pos[u], pos[v]) for u, v in zip(tr.nodes, tr.nodes[1:]))
            if tr.violations() or abs(length - tr.length) > 1e-9 or tr.bound > D.ARC_BOUND + 1e-12:
                arc_bad += 1
        arc_worst = max(arc_worst, rep.makespan)
        arc_bad += rep.makespan > D.ARC_BOUND or bool(verify(inst, s))

    for k, seed in enumerate(_seeds(40, 1000)):
        rng = np.random.default_rng(seed)
        r1 = 0.0 if k % 10 == 0 else (1.0 if k % 10 == 1 else float(rng.uniform(0, 1)))
        m = int(rng.integers(0, 120))
        ang = rng.uniform(0, 2 * math.pi, m)
        rad = rng.uniform(r1, 1.0, m)
        pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        phi = rng.uniform(0, 2 * math.pi)
        _, rep, _ = D.ring_strategy((r1 * math.cos(phi), r1 * math.sin(phi)), r1, pts)
        limit = math.pi + 3 - 3 * r1
        ring_bad += rep.makespan > limit + 1e-9 or any(tr.violations() for tr in rep.traces)
        ring_worst = max(ring_worst, rep.makespan - limit)
    ok = arc_bad == 0 and ring_bad == 0
    assert criterion(4, ok, f"arc: 10^3 instances, max {arc_worst:.4f} <= 7.9651, bad {arc_bad}; "
                            f"ring: 10^3 instances, max slack use {ring_worst:+.4f}, bad {ring_bad}")


def test_criterion_5_crosspolytope(criterion):
    t = time.perf_counter()
    worst, bad = 0.0, 0
    for n in (1, 127, 128, 500, 2000):
        for seed in _seeds(5 + n, 100):
            inst = I.gen_random("ball_l1_r3", n, seed, on_boundary=seed % 5 == 0)
            s, rep = C.crosspolytope_strategy(inst)
            bad += rep.makespan > 13.0 or bool(verify(inst, s))
            worst = max(worst, rep.makespan)
    rng = np.random.default_rng(55)
    e = rng.exponential(size=(1_000_000, 4))
    pts = e[:, :3] / e.sum(axis=1, keepdims=True) * rng.choice([-1.0, 1.0], size=(1_000_000, 3))
    centers = np.array([C.cover_center(k) for k in range(6)])
    cover = float(np.abs(pts - centers[C.covering6_indices(pts)]).sum(axis=1).max())
    dt = time.perf_counter() - t
    ok = bad == 0 and cover <= 2 / 3 + 1e-12 and dt < 300
    assert criterion(5, ok, f"500 l1-ball runs, max makespan {worst:.4f} <= 13, bad {bad}; "
                            f"cover distance max {cover:.12f} <= 2/3; {dt:.1f}s")


def test_criterion_6_mapping(criterion):
    rng = np.random.default_rng(6)
    m = 1_000_000
    p1 = S.random_hemisphere_points(rng, m)
    p2 = S.random_hemisphere_points(rng, m)
    lhs, rhs = S.domination_batch(p1, p2)
    fails = int(np.count_nonzero(lhs > rhs + 1e-12))
    worst = 0.0
    for p in p1[::10]:
        q = S.unmap_from_disk(S.map_to_disk(p))
        worst = max(worst, float(np.abs(np.asarray(q) - p).max()))
    ok = fails == 0 and worst <= 1e-10
    assert criterion(6, ok, f"10^6 pairs, domination failures {fails}; round-trip error {worst:.1e} on 10^5 points")


@pytest.mark.parametrize("eps,limit", [(0.01, 60.0), (0.001, None)], ids=["ci-0.01", "release-0.001"])
def test_criterion_7_sweep(criterion, eps, limit):
    t = time.perf_counter()
    rep = S.sweep_geodesic_ratio(eps)
    dt = time.perf_counter() - t
    ok = rep.violations == 0 and (limit is None or dt < limit)
    assert criterion(7, ok, f"eps={eps}: {rep.cells} cells, max ratio {rep.max_ratio!r}, "
                            f"violations {rep.violations}, {dt:.1f}s")


def test_criterion_8_sphere(criterion):
    b_bad = s_bad = 0
    b_worst = s_worst = 0.0
    applicable = exceeded = 0
    for k, seed in enumerate(_seeds(8, 1000)):
        n = 1 + k % 100
        inst = I.gen_random("sphere_boundary", n, seed, on_boundary=True)
        s, rep = S.boundary_strategy(inst)
        b_bad += bool(verify(inst, s))
        if rep.bound is not None:
            applicable += 1
            b_bad += rep.makespan > S.BOUNDARY_BOUND
            b_worst = max(b_worst, rep.makespan)

        inst = I.gen_random("sphere_surface", n, seed)
        s, rep = S.surface_strategy(inst)
        s_bad += bool(verify(inst, s))
        s_bad += rep.details["exceeded"] != (rep.makespan > S.SURFACE_BOUND)
        exceeded += rep.details["exceeded"]
        s_worst = max(s_worst, rep.makespan)
    ok = b_bad == 0 and s_bad == 0
    assert criterion(8, ok, f"boundary: {applicable}/1000 with hemisphere condition, max {b_worst:.4f} <= 12.37; "
                            f"surface: max {s_worst:.4f} vs 11.65, flagged exceedances {exceeded}; "
                            f"invalid {b_bad + s_bad}")


def test_criterion_9_sanity_ordering(criterion):
    runs = {"disk_l2": [D.arc_strategy, D.combined_strategy, D.disk_ring_strategy],
            "ball_l1_r3": [C.crosspolytope_strategy],
            "sphere_boundary": [S.boundary_strategy],
            "sphere_surface": [S.surface_strategy]}
    spaces = list(runs)
    bad, checks = 0, 0
    for k, seed in enumerate(_seeds(9, 200)):
        space = spaces[k % 4]
        n = 1 + (k // 4) % 10
        inst = I.gen_random(space, n, seed, on_boundary=True if space == "sphere_boundary" else None)
        opt = exact.optimal_makespan(inst)[0]
        for strategy in runs[space]:
            _, rep = strategy(inst)
            checks += 1
            bad += rep.makespan < opt - 1e-9
    assert criterion(9, bad == 0, f"200 instances, {checks} strategy runs, below optimum: {bad}")


def _artifacts(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if not p.name.startswith("manifest")}


def test_criterion_10_determinism(criterion, tmp_path):
    def session(d, threads):
        g = ["--out-dir", str(d), "--threads", threads]
        codes = [main(g + ["gen", "--space", "disk-l2", "--n", "60", "--seed", "10"]),
                 main(g + ["gen", "--space", "ball-l1-r3", "--n", "300", "--seed", "10"]),
                 main(g + ["gen", "--space", "sphere-surface", "--n", "40", "--seed", "10"])]
        for inst, strategy in (("random-disk_l2", "combined"), ("random-ball_l1_r3", "crosspolytope"),
                               ("random-sphere_surface", "surface")):
            path = next(d.glob(inst + "*.json"))
            codes.append(main(g + ["solve", str(path), "--strategy", strategy]))
        codes.append(main(g + ["sweep", "--epsilon", "0.02"]))
        codes.append(main(g + ["conjecture-scan", "--n-min", "3", "--n-max", "5", "--trials", "20", "--seed", "10"]))
        codes.append(main(g + ["audit", "--strategy", "boundary", "--trials", "30", "--seed", "10"]))
        return codes, _artifacts(d)

    a_codes, a = session(tmp_path / "a", "1")
    b_codes, b = session(tmp_path / "b", "1")
    c_codes, c = session(tmp_path / "c", "8")
    ok = a == b == c and set(a_codes + b_codes + c_codes) == {0} and len(a) >= 12
    assert criterion(10, ok, f"{len(a)} artifacts byte-identical across repeat runs and --threads 1 vs 8")
