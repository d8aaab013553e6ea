"""Robots on the unit sphere.

A closed hemisphere around a pole ``T`` is flattened onto the disk of radius
pi/2: the point at angular distance ``delta`` from ``T`` and azimuth
``theta`` goes to the planar point with polar coordinates (delta, theta).
Chords, and (numerically) geodesics too, never exceed the flattened
distance, so a disk plan executed on the sphere is no slower than on the
disk.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import geometry as geo
from .disk import COMBINED_BOUND, BRANCH_THRESHOLD, Plan, StrategyReport, execute_plan, plan_times, plan_two_at_node
from .rounds import matched_rounds
from .schedule import DEFAULT_GEODESIC_STEP, ScheduleBuilder, verify_positions

HALF_PI = math.pi / 2
ARC_CENTER_FACTOR = 5.9651
BOUNDARY_BOUND = 3.0 + HALF_PI * ARC_CENTER_FACTOR
SURFACE_BOUND = 11.65
HEMISPHERE_TOL = 1e-12
DOMINATION_TOL = 1e-12
RATIO_TOL = 1e-12


class SphereError(ValueError):
    pass


@dataclass(frozen=True)
class PoleFrame:
    pole: tuple
    axis: tuple

    @property
    def second(self) -> tuple:
        return tuple(np.cross(self.pole, self.axis))

    @classmethod
    def standard(cls, pole) -> "PoleFrame":
        """Azimuth axis by Gram-Schmidt against the coordinate axis on which
        the pole has the smallest magnitude (lowest index on ties)."""
        t = np.asarray(pole, dtype=float)
        n = np.linalg.norm(t)
        if abs(n - 1.0) > geo.DEFAULT_TOL:
            raise SphereError(f"pole must be a unit vector, norm is {n!r}")
        t = t / n
        k = int(np.argmin(np.abs(t)))
        e = np.zeros(3)
        e[k] = 1.0
        e = e - t * t[k]
        e /= np.linalg.norm(e)
        return cls(tuple(float(c) for c in t), tuple(float(c) for c in e))

    def orthonormality_error(self) -> float:
        m = np.array([self.pole, self.axis, self.second])
        return float(np.abs(m @ m.T - np.eye(3)).max())


NORTH = PoleFrame.standard((0.0, 0.0, 1.0))


def _unit_check(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise SphereError(f"expected a 3-vector, got shape {p.shape}")
    if abs(np.linalg.norm(p) - 1.0) > geo.DEFAULT_TOL:
        raise SphereError(f"point {p.tolist()} is not on the unit sphere")
    return p


def map_to_disk(p, frame: PoleFrame = NORTH) -> geo.PolarPoint:
    p = _unit_check(p)
    t = np.asarray(frame.pole)
    if p @ t < -HEMISPHERE_TOL:
        raise SphereError(f"point {p.tolist()} lies below the hemisphere of the pole")
    delta = min(geo.geodesic(p, t), HALF_PI)
    x = float(p @ np.asarray(frame.axis))
    y = float(p @ np.asarray(frame.second))
    theta = geo.normalize_angle(math.atan2(y, x)) if delta > 0 else 0.0
    return geo.PolarPoint(delta, theta)


def unmap_from_disk(pp: geo.PolarPoint, frame: PoleFrame = NORTH) -> tuple:
    if not (0.0 <= pp.radius <= HALF_PI + HEMISPHERE_TOL):
        raise SphereError(f"radius {pp.radius} outside [0, pi/2]")
    t, e1, e2 = (np.asarray(v) for v in (frame.pole, frame.axis, frame.second))
    s = math.sin(pp.radius)
    v = math.cos(pp.radius) * t + s * (math.cos(pp.angle) * e1 + math.sin(pp.angle) * e2)
    return tuple(float(c) for c in v)


def mapped_distance(d1: float, d2: float, dtheta: float) -> float:
    """Planar distance between polar points (d1, t1) and (d2, t2), |t1-t2| = dtheta.

    Written as sqrt((d1-d2)^2 + 4 d1 d2 sin^2(dtheta/2)), which avoids the
    cancellation of the law-of-cosines form."""
    s = math.sin(dtheta / 2)
    return math.sqrt((d1 - d2) ** 2 + 4 * d1 * d2 * s * s)


def check_euclidean_domination(p1, p2, frame: PoleFrame = NORTH) -> tuple[float, float, bool]:
    a = map_to_disk(p1, frame)
    b = map_to_disk(p2, frame)
    lhs = math.dist(p1, p2)
    dtheta = abs(a.angle - b.angle)
    dtheta = min(dtheta, geo.TWO_PI - dtheta)
    rhs = mapped_distance(a.radius, b.radius, dtheta)
    return lhs, rhs, lhs <= rhs + DOMINATION_TOL


def domination_batch(p1, p2, frame: PoleFrame = NORTH):
    """Vectorized check for (m, 3) arrays; returns (lhs, rhs) arrays."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    m = np.array([frame.axis, frame.second, frame.pole]).T
    q1, q2 = p1 @ m, p2 @ m
    d1 = np.arctan2(np.hypot(q1[:, 0], q1[:, 1]), q1[:, 2])
    d2 = np.arctan2(np.hypot(q2[:, 0], q2[:, 1]), q2[:, 2])
    t1 = np.arctan2(q1[:, 1], q1[:, 0])
    t2 = np.arctan2(q2[:, 1], q2[:, 0])
    s = np.sin((t1 - t2) / 2)
    rhs = np.sqrt((d1 - d2) ** 2 + 4 * d1 * d2 * s * s)
    lhs = np.linalg.norm(p1 - p2, axis=1)
    return lhs, rhs


def random_hemisphere_points(rng, m: int, frame: PoleFrame = NORTH) -> np.ndarray:
    g = rng.standard_normal((m, 3))
    g /= np.linalg.norm(g, axis=1)[:, None]
    t = np.asarray(frame.pole)
    flip = g @ t < 0
    g[flip] -= 2 * np.outer(g[flip] @ t, t)
    return g


# ---------------------------------------------------------------------------
# strategies


@dataclass(frozen=True)
class SphereConfig:
    threshold: float = BRANCH_THRESHOLD
    geodesic_step: float = DEFAULT_GEODESIC_STEP
    tolerance: float = geo.DEFAULT_TOL


def _mapped_plan(positions, members, frame: PoleFrame, extra=()) -> Plan:
    pts = [(0.0, 0.0)] * len(positions)
    for i in members:
        pts[i] = geo.from_polar(map_to_disk(positions[i], frame))
    return Plan(pts + list(extra))


def _to_sphere(frame: PoleFrame):
    return lambda xy: unmap_from_disk(geo.to_polar(xy), frame)


def _finish(builder, pos, metric, tol):
    s = builder.build()
    bad = verify_positions(pos, metric, s, tol)
    if bad:
        raise AssertionError("strategy produced an invalid schedule: " + "; ".join(map(str, bad[:5])))
    return s, max((e.time for e in s.wake_events), default=0.0)


def hemisphere_counts(asleep: np.ndarray) -> np.ndarray:
    """For each asleep robot, how many asleep robots lie in the closed
    hemisphere centered on it (itself included)."""
    if len(asleep) == 0:
        return np.zeros(0, dtype=int)
    return (asleep @ asleep.T >= -HEMISPHERE_TOL).sum(axis=1)


def boundary_strategy(inst, config: SphereConfig = SphereConfig()):
    if inst.space != "sphere_boundary":
        raise ValueError(f"the boundary strategy needs a sphere_boundary instance, got {inst.space}")
    pos = inst.positions
    metric = geo.SPACE_L2
    b = ScheduleBuilder(pos, metric)
    n = inst.n
    if n == 0:
        s, m = _finish(b, pos, metric, config.tolerance)
        return s, StrategyReport("boundary", m, BOUNDARY_BOUND, details={"n1": 0})
    counts = hemisphere_counts(inst.asleep)
    k = int(np.argmax(counts))
    p1 = k + 1
    n1 = int(counts[k])
    frame = PoleFrame.standard(pos[p1])
    upper = [i for i in range(1, n + 1) if i != p1 and pos[i] @ pos[p1] >= -HEMISPHERE_TOL]
    lower = [i for i in range(1, n + 1) if i != p1 and pos[i] @ pos[p1] < -HEMISPHERE_TOL]

    b.wake(0, p1)
    plan = _mapped_plan(pos, upper + [p1], frame)
    halves = plan_two_at_node(plan, 0, p1, p1, upper, radius=HALF_PI, mode="arc")
    execute_plan(b, plan, [0, p1])
    t_mid = max([b.time(i) for i in [0, p1] + upper])
    planned = plan_times(plan, {p1: 1.0})
    rounds = 0
    if lower:
        before = len(lower)
        woken = matched_rounds(b, [0, p1] + upper, lower)
        rounds = _round_count(len(upper) + 2, before)
        assert len(woken) == before
    s, m = _finish(b, pos, metric, config.tolerance)
    applicable = n1 >= math.ceil(n / 2)
    details = {
        "p1": p1,
        "n1": n1,
        "hemisphere_condition": applicable,
        "upper_done": t_mid,
        "upper_planned": max(planned.values()),
        "final_rounds": rounds,
        "halves": [{"robot": h["robot"], "size": h["size"]} for h in halves],
    }
    return s, StrategyReport("boundary", m, BOUNDARY_BOUND if applicable else None, details=details)


def _round_count(awake: int, asleep: int) -> int:
    r = 0
    while asleep > 0:
        asleep -= awake
        awake *= 2
        r += 1
    return r


def surface_strategy(inst, config: SphereConfig = SphereConfig()):
    if inst.space != "sphere_surface":
        raise ValueError(f"the surface strategy needs a sphere_surface instance, got {inst.space}")
    pos = inst.positions
    metric = geo.SPHERE
    b = ScheduleBuilder(pos, metric, config.geodesic_step)
    n = inst.n
    if n == 0:
        s, m = _finish(b, pos, metric, config.tolerance)
        return s, StrategyReport("surface", m, SURFACE_BOUND, details={"exceeded": False})
    T = pos[0]
    ids = range(1, n + 1)
    p1 = min(ids, key=lambda i: (geo.geodesic(pos[i], T), i))
    rho1 = geo.geodesic(pos[p1], T)
    upper = [i for i in ids if i != p1 and pos[i] @ T >= 0]
    lower = [i for i in ids if i != p1 and pos[i] @ T < 0]
    b.wake(0, p1)
    details = {"p1": p1, "rho1": rho1, "upper": len(upper), "lower": len(lower)}

    if upper:
        up = PoleFrame.standard(T)
        pole = len(pos)
        plan = _mapped_plan(pos, upper, up, extra=[(0.0, 0.0)])
        plan.goto(p1, (0.0, 0.0))
        first = min(upper, key=lambda i: (plan.polar[i].radius, plan.polar[i].angle, i))
        plan.wake(p1, pole, first)
        rest = [i for i in upper if i != first]
        halves = plan_two_at_node(plan, p1, first, first, rest, radius=HALF_PI, mode="combined",
                                  threshold=config.threshold)
        execute_plan(b, plan, [p1], _to_sphere(up))
        details["upper_done"] = max(b.time(i) for i in [p1] + upper)
        details["upper_bound"] = 2 * rho1 + HALF_PI * COMBINED_BOUND
        details["upper_branches"] = [h["branch"] for h in halves]

    if lower:
        anti = tuple(-c for c in T)
        down = PoleFrame.standard(anti)
        q1 = min(lower, key=lambda i: (geo.geodesic(pos[i], anti), i))
        rho1b = geo.geodesic(pos[q1], anti)
        plan = _mapped_plan(pos, lower, down)
        plan.wake(0, q1, q1)  # robot 0 enters the plan standing at p1; the leg is real travel
        rest = [i for i in lower if i != q1]
        halves = plan_two_at_node(plan, 0, q1, q1, rest, radius=HALF_PI, mode="combined",
                                  threshold=config.threshold)
        execute_plan(b, plan, [0], _to_sphere(down))
        details["lower_first"] = q1
        details["rho1_lower"] = rho1b
        details["lower_done"] = max(b.time(i) for i in [0] + lower)
        details["lower_branches"] = [h["branch"] for h in halves]

    s, m = _finish(b, pos, metric, config.tolerance)
    details["exceeded"] = m > SURFACE_BOUND
    return s, StrategyReport("surface", m, SURFACE_BOUND, details=details)


# ---------------------------------------------------------------------------
# epsilon-grid sweep


SWEEP_COLUMNS = ("i", "j", "k", "delta1", "delta2", "dtheta", "geodesic", "mapped", "ratio")


@dataclass
class SweepReport:
    epsilon: float
    steps: int
    cells: int
    max_ratio: float
    argmax: tuple
    argmax_params: tuple
    violations: int
    slices: list = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("slices")
        d["argmax"] = list(self.argmax)
        d["argmax_params"] = list(self.argmax_params)
        return d

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=1) + "\n"

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in self.slices:
            w.writerow([row[0], row[1], row[2]] + [repr(float(v)) for v in row[3:]])
        return buf.getvalue()


def _grid(eps: float, m: int):
    idx = np.arange(m + 1)
    delta = np.minimum(HALF_PI * eps * idx, HALF_PI)
    dtheta = np.minimum(math.pi * eps * idx, math.pi)
    return delta, dtheta


def _slice(k: int, delta: np.ndarray, dtheta: float, full: bool):
    d1 = delta[:, None]
    d2 = delta[None, :]
    s1, s2 = np.sin(d1), np.sin(d2)
    st = math.sin(dtheta / 2)
    sd = np.sin(np.abs(d1 - d2) / 2)
    inner = np.sqrt(np.minimum(sd * sd + s1 * s2 * (st * st), 1.0))
    geod = 2 * np.arcsin(inner)
    mapped = np.sqrt((d1 - d2) ** 2 + 4 * d1 * d2 * (st * st))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(mapped > 0, geod / np.where(mapped > 0, mapped, 1.0), 1.0)
    flat = int(np.argmax(ratio))
    i, j = divmod(flat, ratio.shape[1])
    viol = int(np.count_nonzero(ratio > 1 + RATIO_TOL))
    best = (i, j, k, delta[i], delta[j], dtheta, geod[i, j], mapped[i, j], ratio[i, j])
    rows = None
    if full:
        ii, jj = np.meshgrid(np.arange(len(delta)), np.arange(len(delta)), indexing="ij")
        rows = [(int(a), int(b), k, delta[a], delta[b], dtheta, geod[a, b], mapped[a, b], ratio[a, b])
                for a, b in zip(ii.ravel(), jj.ravel())]
    return best, viol, rows


def sweep_geodesic_ratio(epsilon: float, threads: int = 1, full: bool = False) -> SweepReport:
    """Compare geodesic and flattened distance on the grid
    delta_{1,2} = (pi/2) eps {i, j}, dtheta = pi eps k for i, j, k in 0..ceil(1/eps)."""
    if not (0 < epsilon <= 0.5):
        raise SphereError(f"epsilon must lie in (0, 0.5], got {epsilon}")
    m = math.ceil(1.0 / epsilon - 1e-9)
    delta, dthetas = _grid(epsilon, m)
    ks = range(m + 1)

    def work(k):
        return _slice(k, delta, float(dthetas[k]), full)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, ks))
    else:
        results = [work(k) for k in ks]

    best, violations, rows = None, 0, []
    for row, viol, cells in results:  # fixed k order keeps the argmax independent of threads
        violations += viol
        if best is None or row[8] > best[8]:
            best = row
        rows.extend(cells if full else [row])
    return SweepReport(
        epsilon=epsilon,
        steps=m,
        cells=(m + 1) ** 3,
        max_ratio=float(best[8]),
        argmax=(int(best[0]), int(best[1]), int(best[2])),
        argmax_params=(float(best[3]), float(best[4]), float(best[5])),
        violations=violations,
        slices=[tuple(int(v) if n < 3 else float(v) for n, v in enumerate(r)) for r in rows],
    )
