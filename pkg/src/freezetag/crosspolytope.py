"""Wake-up strategy for robots in the unit l1 ball of R^3 (the octahedron).

Up to 127 asleep robots: plain doubling rounds. Beyond that, the source
wakes seven robots inside the most crowded of 14 regions, six of the eight
awake robots walk to the centers of six covering cross-polytopes of radius
``2r/3``, and each cover is solved recursively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .disk import StrategyReport
from .rounds import doubling_rounds
from .schedule import Schedule, ScheduleBuilder, verify_positions

DOUBLING_LIMIT = 127
AXES = "xyz"


class PolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class CrossPolytope:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise PolytopeError("radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, p, tol: float = geo.DEFAULT_TOL) -> bool:
        return sum(abs(a - b) for a, b in zip(p, self.center)) <= self.radius + tol


UNIT = CrossPolytope((0.0, 0.0, 0.0), 1.0)


@dataclass(frozen=True)
class Region14:
    """One of the 14 pieces of a cross-polytope: six half-size cross-polytopes
    on the axes, and eight tetrahedral pyramids, one per octant."""

    kind: str  # "sub" or "pyramid"
    axis: int | None = None
    sign: int | None = None
    octant: tuple | None = None

    @property
    def index(self) -> int:
        if self.kind == "sub":
            return 2 * self.axis + (0 if self.sign > 0 else 1)
        sx, sy, sz = self.octant
        return 6 + 4 * (sx < 0) + 2 * (sy < 0) + (sz < 0)

    @property
    def name(self) -> str:
        if self.kind == "sub":
            return f"sub{AXES[self.axis]}{'+' if self.sign > 0 else '-'}"
        return "pyr" + "".join("+" if s > 0 else "-" for s in self.octant)

    def polytope(self, parent: CrossPolytope) -> CrossPolytope:
        if self.kind != "sub":
            raise PolytopeError("pyramids are not cross-polytopes")
        c = list(parent.center)
        c[self.axis] += self.sign * parent.radius / 2
        return CrossPolytope(tuple(c), parent.radius / 2)

    def vertices(self, parent: CrossPolytope) -> list[tuple]:
        c, h = parent.center, parent.radius / 2
        if self.kind == "sub":
            sub = self.polytope(parent)
            out = []
            for ax in range(3):
                for s in (1, -1):
                    v = list(sub.center)
                    v[ax] += s * h
                    out.append(tuple(v))
            return out
        sx, sy, sz = self.octant
        return [
            c,
            (c[0] + sx * h, c[1] + sy * h, c[2]),
            (c[0] + sx * h, c[1], c[2] + sz * h),
            (c[0], c[1] + sy * h, c[2] + sz * h),
        ]

    def contains(self, p, parent: CrossPolytope, tol: float = geo.DEFAULT_TOL) -> bool:
        if not parent.contains(p, tol):
            return False
        q = [a - b for a, b in zip(p, parent.center)]
        if self.kind == "sub":
            return self.polytope(parent).contains(p, tol)
        a = [abs(v) for v in q]
        if any(q[i] * self.octant[i] < -tol for i in range(3)):
            return False
        return a[0] <= a[1] + a[2] + tol and a[1] <= a[0] + a[2] + tol and a[2] <= a[0] + a[1] + tol


def all_regions() -> list[Region14]:
    """Fixed enumeration order: x+, x-, y+, y-, z+, z-, then octants
    (+++), (++-), ..., (---)."""
    subs = [Region14("sub", ax, s) for ax in range(3) for s in (1, -1)]
    octs = [Region14("pyramid", octant=(sx, sy, sz)) for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)]
    return subs + octs


REGIONS = all_regions()


def _sign(v: float) -> int:
    return 1 if v >= 0 else -1


def region14_of(p, parent: CrossPolytope = UNIT, tol: float = geo.DEFAULT_TOL) -> Region14:
    if not parent.contains(p, tol):
        raise PolytopeError(f"point {tuple(p)} lies outside the cross-polytope")
    q = [a - b for a, b in zip(p, parent.center)]
    a = [abs(v) for v in q]
    # |q_ax| >= sum of the other two  <=>  inside the half-size polytope on that axis
    for ax in range(3):
        if a[ax] >= a[(ax + 1) % 3] + a[(ax + 2) % 3]:
            return REGIONS[2 * ax + (0 if q[ax] >= 0 else 1)]
    return Region14("pyramid", octant=tuple(_sign(v) for v in q))


def region14_indices(points, parent: CrossPolytope = UNIT) -> np.ndarray:
    """Vectorized :func:`region14_of` returning region indices 0..13."""
    q = np.asarray(points, dtype=float) - np.asarray(parent.center)
    a = np.abs(q)
    neg = q < 0
    out = 6 + 4 * neg[:, 0] + 2 * neg[:, 1] + neg[:, 2]
    for ax in (2, 1, 0):  # later assignments win, so go in reverse priority
        hit = a[:, ax] >= a[:, (ax + 1) % 3] + a[:, (ax + 2) % 3]
        out = np.where(hit, 2 * ax + neg[:, ax], out)
    return out.astype(int)


def cover_center(index: int, parent: CrossPolytope = UNIT) -> tuple:
    ax, neg = divmod(index, 2)
    c = list(parent.center)
    c[ax] += (-1 if neg else 1) * parent.radius / 3
    return tuple(c)


def cover_polytope(index: int, parent: CrossPolytope = UNIT) -> CrossPolytope:
    return CrossPolytope(cover_center(index, parent), 2 * parent.radius / 3)


def covering6_index(p, parent: CrossPolytope = UNIT, tol: float = geo.DEFAULT_TOL) -> int:
    """Cover whose center lies on the axis of the largest |coordinate|."""
    if not parent.contains(p, tol):
        raise PolytopeError(f"point {tuple(p)} lies outside the cross-polytope")
    q = [a - b for a, b in zip(p, parent.center)]
    a = [abs(v) for v in q]
    ax = max(range(3), key=lambda i: (a[i], -i))
    return 2 * ax + (0 if q[ax] >= 0 else 1)


def covering6_indices(points, parent: CrossPolytope = UNIT) -> np.ndarray:
    q = np.asarray(points, dtype=float) - np.asarray(parent.center)
    ax = np.argmax(np.abs(q), axis=1)  # first maximum wins, matching the scalar rule
    neg = q[np.arange(len(q)), ax] < 0
    return 2 * ax + neg


@dataclass(frozen=True)
class BoundFn:
    """f(d) for a ball of l1 diameter d."""

    coefficient: float = 13.0 / 6.0
    shrink: float = 2.0 / 3.0

    def __call__(self, d: float) -> float:
        return self.coefficient * d / (1.0 - self.shrink)

    def partial_sum(self, d: float, terms: int) -> float:
        return sum(self.coefficient * d * self.shrink**k for k in range(terms))

    def step(self, d: float) -> float:
        return self.coefficient * d + self(self.shrink * d)


BOUND = BoundFn()


def crosspolytope_bound(radius: float = 1.0) -> float:
    return BOUND(2.0 * radius)


# ---------------------------------------------------------------------------
# doubling


def doubling_time_bound(awake: int, asleep: int, r: float) -> float:
    if asleep == 0:
        return 0.0
    return 2 * r * math.ceil(math.log2((awake + asleep) / awake))


def doubling_schedule(awake, asleep, r: float, ready=None, metric: geo.Metric = geo.BALL_L1,
                      tolerance: float = geo.DEFAULT_TOL) -> tuple[Schedule, float]:
    """Doubling from several awake robots; robots ``0..A-1`` are the awake
    ones (free from their ready times), ``A..`` the asleep ones.

    Returns the schedule and the time elapsed after the latest ready time.
    """
    awake = np.asarray(awake, dtype=float).reshape(-1, metric.dimension)
    asleep = np.asarray(asleep, dtype=float).reshape(-1, metric.dimension)
    A = len(awake)
    if A == 0:
        raise PolytopeError("need at least one awake robot")
    for i, p in enumerate(asleep):
        for j, q in enumerate(awake):
            if geo.unchecked_dist(metric, p, q) > 2 * r + tolerance:
                raise PolytopeError(f"asleep robot {i} is farther than 2r from awake robot {j}")
    ready = [0.0] * A if ready is None else [float(t) for t in ready]
    pos = np.vstack([awake, asleep])
    b = ScheduleBuilder(pos, metric, initially_awake=range(A))
    for i, t in enumerate(ready):
        b.wait_until(i, t)
    doubling_rounds(b, range(A), range(A, len(pos)))
    s = b.build()
    bad = verify_positions(pos, metric, s, tolerance, initially_awake=range(A))
    if bad:
        raise AssertionError("; ".join(map(str, bad[:5])))
    end = max((e.time for e in s.wake_events), default=max(ready))
    return s, max(0.0, end - max(ready))


# ---------------------------------------------------------------------------
# the strategy


@dataclass
class _Trace:
    radii: list = field(default_factory=list)  # (depth, radius) per recursive call
    seven: list = field(default_factory=list)
    max_depth: int = 0


def wake_seven(builder: ScheduleBuilder, robot: int, ball: CrossPolytope, asleep) -> dict:
    """From ``robot`` standing in ``ball``, wake 7 robots inside the most
    crowded of the 14 regions. Returns diagnostics incl. the eight awake ids."""
    asleep = sorted(asleep)
    if len(asleep) < DOUBLING_LIMIT + 1:
        raise PolytopeError(f"wake_seven needs at least {DOUBLING_LIMIT + 1} asleep robots, got {len(asleep)}")
    start = builder.time(robot)
    idx = region14_indices([builder.positions[i] for i in asleep], ball)
    counts = np.bincount(idx, minlength=14)
    region = int(np.argmax(counts))  # first maximum: fixed enumeration order
    members = [a for a, k in zip(asleep, idx) if k == region]
    c = ball.center
    first = min(members, key=lambda i: (geo.unchecked_dist(geo.BALL_L1, builder.positions[i], c), i))
    builder.wake(robot, first)
    rest = [m for m in members if m != first]
    woken = doubling_rounds(builder, [robot, first], rest, limit=6)
    awake = [robot, first] + woken
    return {
        "region": REGIONS[region].name,
        "count": int(counts[region]),
        "awake": awake,
        "elapsed": max(builder.time(r) for r in awake[1:]) - start,
        "radius": ball.radius,
    }


def _solve_ball(builder: ScheduleBuilder, robot: int, ball: CrossPolytope, asleep: list[int],
                depth: int, trace: _Trace) -> None:
    trace.radii.append((depth, ball.radius))
    trace.max_depth = max(trace.max_depth, depth)
    if len(asleep) <= DOUBLING_LIMIT:
        doubling_rounds(builder, [robot], asleep)
        return
    info = wake_seven(builder, robot, ball, asleep)
    info["depth"] = depth
    trace.seven.append({k: v for k, v in info.items() if k != "awake"})
    awake = info["awake"]
    left = sorted(set(asleep) - set(awake))
    cover = covering6_indices([builder.positions[i] for i in left], ball) if left else np.zeros(0, int)
    groups = {k: [i for i, g in zip(left, cover) if g == k] for k in range(6)}
    free = list(awake)
    jobs = []
    for k in range(6):
        if not groups[k]:
            continue
        cc = cover_center(k, ball)
        r = min(free, key=lambda i: (builder.time(i) + geo.unchecked_dist(builder.metric, builder.position(i), cc), i))
        free.remove(r)
        builder.move(r, cc)
        jobs.append((r, cover_polytope(k, ball), groups[k]))
    # surplus robots stay where they are
    for r, sub, group in jobs:
        _solve_ball(builder, r, sub, group, depth + 1, trace)


def crosspolytope_strategy(inst, tolerance: float = geo.DEFAULT_TOL):
    if inst.space != "ball_l1_r3":
        raise ValueError(f"the cross-polytope strategy needs a ball_l1_r3 instance, got {inst.space}")
    pos = inst.positions
    b = ScheduleBuilder(pos, geo.BALL_L1)
    trace = _Trace()
    _solve_ball(b, 0, UNIT, list(range(1, inst.n + 1)), 0, trace)
    s = b.build()
    bad = verify_positions(pos, geo.BALL_L1, s, tolerance)
    if bad:
        raise AssertionError("strategy produced an invalid schedule: " + "; ".join(map(str, bad[:5])))
    m = max((e.time for e in s.wake_events), default=0.0)
    details = {
        "mode": "doubling" if inst.n <= DOUBLING_LIMIT else "recursive",
        "depth": trace.max_depth,
        "radii": [r for _, r in trace.radii],
        "radius_by_depth": sorted({d: r for d, r in trace.radii}.items()),
        "wake_seven": trace.seven,
    }
    return s, StrategyReport("crosspolytope", m, crosspolytope_bound(1.0), details=details)
