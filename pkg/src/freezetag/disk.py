"""Wake-up strategies for robots in a Euclidean disk.

The strategies first produce a *plan* in planar coordinates (which robot
wakes whom, in which order, plus any intermediate way-points) and then
execute it on a :class:`~freezetag.schedule.ScheduleBuilder`. Keeping the
two apart lets the sphere strategies plan on a mapped disk while travelling
on the sphere.

Angles inside a plan are measured relative to a reference direction, the
direction of the first woken robot, so that half-disks and sectors are plain
intervals ``[lo, lo + width]`` with no wrap-around.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .schedule import Schedule, ScheduleBuilder, verify_positions

ARC_CONSTANT = 3.9651
ARC_BOUND = 7.9651
COMBINED_BOUND = 5.4162
BRANCH_THRESHOLD = 0.3627

START = -1  # virtual tree node: a ring's starting way-point


@dataclass(frozen=True)
class DiskConfig:
    threshold: float = BRANCH_THRESHOLD
    tolerance: float = geo.DEFAULT_TOL


@dataclass
class StrategyReport:
    strategy: str
    makespan: float
    bound: float | None
    traces: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def margin(self) -> float | None:
        return None if self.bound is None else self.bound - self.makespan

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "makespan": self.makespan,
            "bound": self.bound,
            "margin": self.margin,
            "details": self.details,
        }


# ---------------------------------------------------------------------------
# plans


class Plan:
    """Per-robot action lists in planar coordinates.

    ``parent[j]`` is the node the waker of ``j`` stood on when it set off;
    ``via[j]`` lists plan-space way-points visited on that leg.
    """

    def __init__(self, points):
        self.points = [tuple(float(c) for c in p) for p in points]
        self.polar = [geo.to_polar(p) for p in self.points]
        self.actions: dict[int, list] = {}
        self.parent: dict[int, int] = {}
        self.via: dict[int, list] = {}
        self._pending_via: dict[int, list] = {}

    def wake(self, robot: int, node: int, target: int) -> None:
        self.actions.setdefault(robot, []).append(("wake", target))
        self.parent[target] = node
        self.via[target] = self._pending_via.pop(robot, [])

    def goto(self, robot: int, point) -> None:
        point = tuple(float(c) for c in point)
        self.actions.setdefault(robot, []).append(("goto", point))
        self._pending_via.setdefault(robot, []).append(point)

    def children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {}
        for c, p in self.parent.items():
            kids.setdefault(p, []).append(c)
        return kids


def execute_plan(builder: ScheduleBuilder, plan: Plan, starts, to_space=None) -> None:
    """Run ``plan`` from the given already-active robots.

    ``to_space`` maps plan-space way-points to the builder's space; wake
    targets always use the builder's own robot positions.
    """
    queue = deque(starts)
    while queue:
        r = queue.popleft()
        for kind, arg in plan.actions.get(r, ()):
            if kind == "wake":
                builder.wake(r, arg)
                queue.append(arg)
            else:
                builder.move(r, to_space(arg) if to_space else arg)


def plan_times(plan: Plan, root_times: dict[int, float]) -> dict[int, float]:
    """Wake times the plan would achieve if travel cost plan-space distance.

    ``root_times`` gives the nodes that are occupied before the plan starts.
    """
    t = dict(root_times)
    kids = plan.children()
    stack = list(root_times)
    while stack:
        v = stack.pop()
        for c in kids.get(v, ()):
            legs = [plan.points[v]] + plan.via.get(c, []) + [plan.points[c]]
            t[c] = t[v] + sum(math.dist(a, b) for a, b in zip(legs, legs[1:]))
            stack.append(c)
    return t

def _rel_angles(plan: Plan, ref: float) -> dict[int, float]:
    return {i: geo.normalize_angle(pp.angle - ref) for i, pp in enumerate(plan.polar)}


def _arc_sectors(plan: Plan, psi, robot: int, node: int, lo: float, width: float, cands: list[int]) -> None:
    """Sector halving: wake the candidate nearest the center, split the
    sector at its angular midpoint, waker keeps the lower half."""
    stack = [(robot, node, lo, width, cands)]
    while stack:
        robot, node, lo, width, cands = stack.pop()
        if not cands:
            continue
        target = cands[0]
        plan.wake(robot, node, target)
        half = width / 2.0
        cut = lo + half
        lower = [c for c in cands[1:] if psi[c] <= cut]
        upper = [c for c in cands[1:] if psi[c] > cut]
        stack.append((target, target, cut, half, upper))
        stack.append((robot, target, lo, half, lower))


def _ring_band(plan: Plan, robot: int, node: int, r_lo: float, r_hi: float, cands: list[int]) -> None:
    """Ring sweep inside one half-ring: wake the candidate with the least
    angular advance, halve the radial band, waker keeps the inner part.
    ``cands`` must be sorted by (advance, radius, index)."""
    stack = [(robot, node, r_lo, r_hi, cands)]
    while stack:
        robot, node, r_lo, r_hi, cands = stack.pop()
        if not cands:
            continue
        target = cands[0]
        plan.wake(robot, node, target)
        mid = (r_lo + r_hi) / 2.0
        inner = [c for c in cands[1:] if plan.polar[c].radius <= mid]
        outer = [c for c in cands[1:] if plan.polar[c].radius > mid]
        stack.append((target, target, mid, r_hi, outer))
        stack.append((robot, target, r_lo, mid, inner))


def _by_radius(plan: Plan, ids) -> list[int]:
    return sorted(ids, key=lambda i: (plan.polar[i].radius, plan.polar[i].angle, i))


def _halves(plan: Plan, node: int, cands):
    """Split candidates by the diameter through ``node``: (lower, upper) with
    angles relative to the node's direction; diameter ties go to the lower."""
    ref = plan.polar[node].angle
    psi = _rel_angles(plan, ref)
    lower = [c for c in cands if psi[c] <= math.pi]
    upper = [c for c in cands if psi[c] > math.pi]
    return psi, lower, upper


def _plan_ring_half(plan: Plan, psi, robot: int, node: int, r_inner: float, r_outer: float,
                    cands, direction: int) -> dict:
    if direction > 0:
        adv = {c: psi[c] for c in cands}
    else:
        adv = {c: (geo.TWO_PI - psi[c]) if psi[c] > 0 else 0.0 for c in cands}
    ordered = sorted(cands, key=lambda c: (adv[c], plan.polar[c].radius, c))
    _ring_band(plan, robot, node, r_inner, r_outer, ordered)
    return adv


def plan_two_at_node(plan: Plan, robot_a: int, robot_b: int, node: int, cands, radius: float = 1.0,
                     mode: str = "combined", threshold: float = BRANCH_THRESHOLD) -> list[dict]:
    """Two robots stand on ``node`` (the robot nearest the center, or the
    center itself). Each takes one half-disk; ``robot_a`` the half that
    starts at the node's direction.

    ``mode`` is ``"arc"`` (always sector halving) or ``"combined"`` (per-half
    choice between sector halving and the ring sweep).
    Returns one diagnostic dict per half.
    """
    psi, lower, upper = _halves(plan, node, cands)
    r1 = plan.polar[node].radius
    phi = plan.polar[node].angle
    info = []
    for robot, members, lo, direction in ((robot_a, lower, 0.0, +1), (robot_b, upper, math.pi, -1)):
        half = {"robot": robot, "size": len(members), "r1": r1}
        info.append(half)
        if not members:
            half["branch"] = "empty"
            half["r2"] = None
            continue
        members = _by_radius(plan, members)
        r2 = plan.polar[members[0]].radius
        half["r2"] = r2
        if mode == "arc" or r2 <= threshold * radius:
            half["branch"] = "arc"
            half["first"] = members[0]
            _arc_sectors(plan, psi, robot, node, lo, math.pi, members)
        else:
            half["branch"] = "ring"
            start = geo.from_polar(geo.PolarPoint(r2, phi))
            if r2 > r1:
                plan.goto(robot, start)
            half["ring_start"] = start
            half["direction"] = direction
            half["members"] = members
            half["advance"] = _plan_ring_half(plan, psi, robot, node, r2, radius, members, direction)
    return info


def _nearest_first(plan: Plan, ids) -> int:
    return _by_radius(plan, ids)[0]


# ---------------------------------------------------------------------------
# traces


@dataclass
class ArcPathTrace:
    nodes: tuple
    d: tuple
    r: tuple
    alpha: tuple
    beta: tuple
    a: tuple
    b: tuple
    c: tuple
    length: float
    bound: float

    def violations(self, tol: float = 1e-9) -> list[str]:
        out = []
        for i in range(1, len(self.r) - 1):
            if self.r[i + 1] < self.r[i] - tol:
                out.append(f"radius decreases at step {i + 1}")
        # b[i+1] vs 2 r_i sin(alpha_i / 2); index 0 of the tuples is node 0
        for i in range(1, len(self.r) - 1):
            expect = 2.0 * self.r[i] * math.sin(self.alpha[i] / 2.0)
            if abs(self.b[i + 1] - expect) > tol:
                out.append(f"b[{i + 1}]={self.b[i + 1]!r} != 2 r sin(alpha/2)={expect!r}")
        for i in range(2, len(self.alpha)):
            if self.alpha[i] > math.pi / 2 ** (i - 2) + tol:
                out.append(f"alpha[{i}]={self.alpha[i]!r} exceeds pi/2^{i - 2}")
        if self.length > self.bound + tol:
            out.append(f"path length {self.length!r} exceeds {self.bound!r}")
        return out


@dataclass
class RingPathTrace:
    nodes: tuple
    r: tuple
    advance: tuple
    a: tuple
    b: tuple
    d: tuple
    thickness: float
    length: float
    bound: float

    def violations(self, tol: float = 1e-9) -> list[str]:
        out = []
        for i in range(1, len(self.b)):
            cap = self.thickness if i == 1 else self.thickness / 2 ** (i - 2)
            if self.b[i] > cap + tol:
                out.append(f"b[{i}]={self.b[i]!r} exceeds {cap!r}")
        for i in range(1, len(self.advance)):
            if self.advance[i] < self.advance[i - 1] - tol:
                out.append(f"sweep goes backwards at step {i}")
            if self.d[i] > self.a[i] + self.b[i] + tol:
                out.append(f"d[{i}] exceeds a+b")
        if sum(self.a) > math.pi + tol:
            out.append(f"sum of a = {sum(self.a)!r} exceeds pi")
        if self.length > self.bound + tol:
            out.append(f"path length {self.length!r} exceeds {self.bound!r}")
        return out


def _leaf_paths(kids: dict[int, list[int]], root: int, members=None):
    paths = []
    stack = [(root, (root,))]
    while stack:
        v, path = stack.pop()
        nxt = [c for c in kids.get(v, ()) if members is None or c in members]
        if not nxt:
            paths.append(path)
        for c in sorted(nxt, reverse=True):
            stack.append((c, path + (c,)))
    return paths


def arc_traces(points, paths, times, radius: float = 1.0) -> list[ArcPathTrace]:
    """Per-path analysis quantities for sector-halving paths rooted at the
    disk center."""
    out = []
    for path in paths:
        p = [points[v] for v in path]
        r = [math.hypot(*q) for q in p]
        k = len(path)
        d = [0.0] + [math.dist(p[i - 1], p[i]) for i in range(1, k)]
        alpha = [geo.angle_between(p[i], p[i + 1]) if i + 1 < k else 0.0 for i in range(k)]
        alpha[0] = 0.0
        c = [p[0]]
        for i in range(1, k):
            c.append((p[i][0] * r[i - 1] / r[i], p[i][1] * r[i - 1] / r[i]) if r[i] > 0 else p[i])
        a = [0.0] + [math.dist(p[i], c[i]) for i in range(1, k)]
        b = [0.0] + [math.dist(p[i - 1], c[i]) for i in range(1, k)]
        beta = [0.0] * k
        for i in range(1, k - 1):
            u = (p[i][0] - c[i + 1][0], p[i][1] - c[i + 1][1])
            w = (p[i + 1][0] - c[i + 1][0], p[i + 1][1] - c[i + 1][1])
            beta[i] = geo.angle_between(u, w)
        r1 = r[1] if k > 1 else 0.0
        r2 = r[2] if k > 2 else r1
        bound = ARC_CONSTANT * radius + 2 * r1 + 2 * r2
        out.append(ArcPathTrace(tuple(path), tuple(d), tuple(r), tuple(alpha), tuple(beta), tuple(a),
                                tuple(b), tuple(c), times[path[-1]], bound))
    return out


def ring_traces(points, start, paths, times, start_time: float, advance, r_inner: float,
                radius: float = 1.0) -> list[RingPathTrace]:
    """Per-path quantities for a ring sweep starting at way-point ``start``;
    paths begin with the virtual node START."""
    out = []
    T = radius - r_inner
    for path in paths:
        p = [start] + [points[v] for v in path[1:]]
        r = [math.hypot(*q) for q in p]
        adv = [0.0] + [advance[v] for v in path[1:]]
        k = len(path)
        d = [0.0] + [math.dist(p[i - 1], p[i]) for i in range(1, k)]
        a = [0.0] + [2 * r[i - 1] * math.sin(abs(adv[i] - adv[i - 1]) / 2) for i in range(1, k)]
        b = [0.0] + [abs(r[i] - r[i - 1]) for i in range(1, k)]
        length = times[path[-1]] - start_time if k > 1 else 0.0
        out.append(RingPathTrace(tuple(path), tuple(r), tuple(adv), tuple(a), tuple(b), tuple(d), T,
                                 length, math.pi * radius + 3 * T))
    return out


def _ring_paths(plan: Plan, members):
    members = set(members)
    kids: dict[int, list[int]] = {}
    for c in members:
        p = plan.parent[c]
        key = p if p in members else START
        kids.setdefault(key, []).append(c)
    return _leaf_paths(kids, START)


# ---------------------------------------------------------------------------
# strategies


def _check_disk_instance(inst) -> None:
    if inst.space != "disk_l2":
        raise ValueError(f"disk strategies need a disk_l2 instance, got {inst.space}")


def _wake_times(s: Schedule, robots: int) -> list[float]:
    t = [0.0] * robots
    for e in s.wake_events:
        t[e.target_id] = e.time
    return t


def _finish(builder: ScheduleBuilder, positions, tol: float) -> tuple[Schedule, float]:
    s = builder.build()
    bad = verify_positions(positions, builder.metric, s, tol)
    if bad:
        raise AssertionError("strategy produced an invalid schedule: " + "; ".join(map(str, bad[:5])))
    return s, max((e.time for e in s.wake_events), default=0.0)


def arc_strategy(inst, config: DiskConfig = DiskConfig()):
    _check_disk_instance(inst)
    pos = inst.positions
    plan = Plan(pos)
    b = ScheduleBuilder(pos, geo.DISK_L2)
    if inst.n == 0:
        s, m = _finish(b, pos, config.tolerance)
        return s, StrategyReport("arc", m, ARC_BOUND)
    ids = list(range(1, inst.n + 1))
    p1 = _nearest_first(plan, ids)
    plan.wake(0, 0, p1)
    halves = plan_two_at_node(plan, 0, p1, p1, [i for i in ids if i != p1], mode="arc")
    execute_plan(b, plan, [0])
    s, m = _finish(b, pos, config.tolerance)
    times = _wake_times(s, len(pos))
    traces = arc_traces(plan.points, _leaf_paths(plan.children(), 0), times)
    details = {"r1": plan.polar[p1].radius, "halves": [_half_summary(h) for h in halves]}
    return s, StrategyReport("arc", m, ARC_BOUND, traces, details)


def ring_bound(r_inner: float, radius: float = 1.0) -> float:
    return math.pi * radius + 3.0 * (radius - r_inner)


def ring_strategy(start, r_inner: float, asleep, config: DiskConfig = DiskConfig(), radius: float = 1.0):
    """Two robots standing together at ``start`` on the circle of radius
    ``r_inner`` wake every robot of the ring ``r_inner <= |p| <= radius``.

    Returns ``(schedule, report, positions)``: robot 0 and robot 1 both start
    at ``start`` (robot 1 is woken at time 0), robots 2.. are ``asleep``.
    """
    tol = config.tolerance
    start = tuple(float(c) for c in start)
    if abs(math.hypot(*start) - r_inner) > tol:
        raise ValueError(f"awake robots must stand on the inner circle of radius {r_inner}")
    asleep = np.asarray(asleep, dtype=float).reshape(-1, 2)
    for i, p in enumerate(asleep):
        rp = math.hypot(*p)
        if rp < r_inner - tol or rp > radius + tol:
            raise ValueError(f"asleep robot {i} at radius {rp} lies outside the ring [{r_inner}, {radius}]")
    pos = np.vstack([np.array([start, start]), asleep])
    plan = Plan(pos)
    b = ScheduleBuilder(pos, geo.DISK_L2)
    b.wake(0, 1)
    cands = list(range(2, len(pos)))
    psi, lower, upper = _halves(plan, 1, cands)
    advances = {}
    for robot, members, direction in ((0, lower, +1), (1, upper, -1)):
        advances.update(_plan_ring_half(plan, psi, robot, 1, r_inner, radius, members, direction))
    execute_plan(b, plan, [0, 1])
    s, m = _finish(b, pos, tol)
    times = _wake_times(s, len(pos))
    traces = []
    for members in (lower, upper):
        paths = _ring_paths(plan, members)
        traces += ring_traces(plan.points, start, paths, times, 0.0, advances, r_inner, radius)
    bound = ring_bound(r_inner, radius)
    return s, StrategyReport("ring", m, bound, traces, {"r_inner": r_inner}), pos


def disk_ring_strategy(inst, config: DiskConfig = DiskConfig()):
    """Ring sweep on a whole disk instance: wake the nearest robot, then run
    the two-robot ring sweep from there."""
    _check_disk_instance(inst)
    pos = inst.positions
    plan = Plan(pos)
    b = ScheduleBuilder(pos, geo.DISK_L2)
    if inst.n == 0:
        s, m = _finish(b, pos, config.tolerance)
        return s, StrategyReport("ring", m, ring_bound(0.0))
    ids = list(range(1, inst.n + 1))
    p1 = _nearest_first(plan, ids)
    r1 = plan.polar[p1].radius
    plan.wake(0, 0, p1)
    psi, lower, upper = _halves(plan, p1, [i for i in ids if i != p1])
    advances = {}
    for robot, members, direction in ((0, lower, +1), (p1, upper, -1)):
        advances.update(_plan_ring_half(plan, psi, robot, p1, r1, 1.0, members, direction))
    execute_plan(b, plan, [0])
    s, m = _finish(b, pos, config.tolerance)
    times = _wake_times(s, len(pos))
    traces = []
    for members in (lower, upper):
        paths = _ring_paths(plan, members)
        traces += ring_traces(plan.points, plan.points[p1], paths, times, times[p1], advances, r1)
    return s, StrategyReport("ring", m, r1 + ring_bound(r1), traces, {"r1": r1})


def _half_summary(h: dict) -> dict:
    keep = ("robot", "size", "branch", "r1", "r2", "bound", "makespan")
    return {k: h[k] for k in keep if k in h}


def combined_strategy(inst, config: DiskConfig = DiskConfig()):
    _check_disk_instance(inst)
    pos = inst.positions
    plan = Plan(pos)
    b = ScheduleBuilder(pos, geo.DISK_L2)
    if inst.n == 0:
        s, m = _finish(b, pos, config.tolerance)
        return s, StrategyReport("combined", m, COMBINED_BOUND, details={"halves": []})
    ids = list(range(1, inst.n + 1))
    p1 = _nearest_first(plan, ids)
    r1 = plan.polar[p1].radius
    plan.wake(0, 0, p1)
    halves = plan_two_at_node(plan, 0, p1, p1, [i for i in ids if i != p1], mode="combined",
                              threshold=config.threshold)
    execute_plan(b, plan, [0])
    s, m = _finish(b, pos, config.tolerance)
    times = _wake_times(s, len(pos))
    kids = plan.children()
    traces = []
    for h in halves:
        members = set()
        if h["branch"] == "arc":
            paths = [(0, p1) + p for p in _leaf_paths(kids, h["first"])]
            traces += arc_traces(plan.points, paths, times)
            members.update(v for p in paths for v in p[2:])
            h["bound"] = ARC_CONSTANT + 2 * r1 + 2 * h["r2"]
        elif h["branch"] == "ring":
            members = set(h["members"])
            paths = _ring_paths(plan, h["members"])
            start_time = times[p1] + (h["r2"] - r1)
            traces += ring_traces(plan.points, h["ring_start"], paths, times, start_time, h["advance"], h["r2"])
            h["bound"] = 3.0 + math.pi - 2 * h["r2"]
        h["makespan"] = max((times[v] for v in members), default=times[p1])
    details = {"r1": r1, "threshold": config.threshold, "halves": [_half_summary(h) for h in halves]}
    return s, StrategyReport("combined", m, COMBINED_BOUND, traces, details)

