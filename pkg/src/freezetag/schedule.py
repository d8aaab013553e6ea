"""Timed robot trajectories, wake events, and the replay verifier.

A :class:`Schedule` is the common output of every strategy: one polyline per
activated robot plus the list of wake events. :func:`verify` replays it
against the instance and reports every broken rule instead of raising.

For the sphere-surface metric a segment between consecutive waypoints means
the shorter great-circle arc; builders sample long arcs densely so that no
segment is ambiguous.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import geometry as geo

DEFAULT_GEODESIC_STEP = math.pi / 512


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Waypoint:
    time: float
    position: tuple[float, ...]


@dataclass(frozen=True)
class Trajectory:
    robot_id: int
    activation_time: float
    waypoints: tuple[Waypoint, ...]


@dataclass(frozen=True)
class WakeEvent:
    waker_id: int
    target_id: int
    time: float


@dataclass(frozen=True)
class Schedule:
    robots: int
    trajectories: tuple[Trajectory, ...]
    wake_events: tuple[WakeEvent, ...]

    def trajectory(self, robot_id: int) -> Trajectory | None:
        for tr in self.trajectories:
            if tr.robot_id == robot_id:
                return tr
        return None


def makespan(s: Schedule) -> float:
    if not s.wake_events:
        return 0.0
    return max(ev.time for ev in s.wake_events)


# ---------------------------------------------------------------------------
# building schedules


def _slerp(p, q, t: float, angle: float):
    if angle == 0.0:
        return tuple(p)
    s = math.sin(angle)
    if s < 1e-12:
        # antipodal or tiny arc: fall back to normalized lerp / explicit great circle
        raise ScheduleError("slerp across an ill-defined arc")
    a = math.sin((1.0 - t) * angle) / s
    b = math.sin(t * angle) / s
    v = [a * pi + b * qi for pi, qi in zip(p, q)]
    n = math.sqrt(sum(c * c for c in v))
    return tuple(c / n for c in v)


def _orthogonal_unit(p):
    # any unit vector orthogonal to p, deterministic
    axis = min(range(3), key=lambda i: abs(p[i]))
    e = [0.0, 0.0, 0.0]
    e[axis] = 1.0
    d = sum(a * b for a, b in zip(p, e))
    v = [b - d * a for a, b in zip(p, e)]
    n = math.sqrt(sum(c * c for c in v))
    return tuple(c / n for c in v)


def great_circle_samples(p, q, step: float = DEFAULT_GEODESIC_STEP):
    """Points strictly after ``p`` up to and including ``q`` along the
    shorter arc, spaced at most ``step`` apart, with cumulative arc lengths."""
    total = geo.geodesic(p, q)
    if total == 0.0:
        return []
    k = max(1, math.ceil(total / step))
    if math.sin(total) < 1e-9:
        # antipodal: route through a deterministic midpoint
        mid = _orthogonal_unit(p)
        first = great_circle_samples(p, mid, step)
        second = great_circle_samples(mid, q, step)
        off = geo.geodesic(p, mid)
        return first + [(off + s, pt) for s, pt in second]
    out = []
    for i in range(1, k):
        out.append((total * i / k, _slerp(p, q, i / k, total)))
    out.append((total, tuple(float(c) for c in q)))
    return out


class ScheduleBuilder:
    """Incrementally records robot motion at unit speed.

    Robot 0 starts awake at time 0. Every other robot becomes active through
    :meth:`wake`. Calls for one robot must come in chronological order, which
    holds as long as a robot's own actions are issued one after another.
    """

    def __init__(self, positions, metric: geo.Metric, geodesic_step: float = DEFAULT_GEODESIC_STEP,
                 initially_awake: Iterable[int] = (0,)):
        self.positions = [tuple(float(c) for c in p) for p in np.asarray(positions, dtype=float)]
        self.metric = metric
        self.geodesic_step = geodesic_step
        self._wps: dict[int, list[Waypoint]] = {}
        self._activation: dict[int, float] = {}
        self.wakes: list[WakeEvent] = []
        for r in initially_awake:
            self._activate(r, 0.0)

    @property
    def robots(self) -> int:
        return len(self.positions)

    def _activate(self, robot: int, t: float) -> None:
        if robot in self._activation:
            raise ScheduleError(f"robot {robot} is already active")
        self._activation[robot] = t
        self._wps[robot] = [Waypoint(t, self.positions[robot])]

    def is_active(self, robot: int) -> bool:
        return robot in self._activation

    def time(self, robot: int) -> float:
        return self._wps[robot][-1].time

    def position(self, robot: int) -> tuple[float, ...]:
        return self._wps[robot][-1].position

    def travel_time(self, robot: int, point) -> float:
        return geo.unchecked_dist(self.metric, self.position(robot), point)

    def _append(self, robot: int, t: float, point) -> None:
        wps = self._wps[robot]
        last = wps[-1]
        d = geo.unchecked_dist(self.metric, last.position, point)
        if d == 0.0:
            return
        # start + d can round below start + d; for microscopic legs that
        # shows up as a speed above 1, so nudge the arrival by a few ulps
        while (t - last.time) * (1.0 + 1e-12) < d:
            t = math.nextafter(t, math.inf)
        wps.append(Waypoint(t, point))

    def move(self, robot: int, point) -> float:
        """Walk ``robot`` straight (or along a great circle) to ``point``."""
        point = tuple(float(c) for c in point)
        start_t = self.time(robot)
        here = self.position(robot)
        if self.metric.kind == geo.SPHERE_GEODESIC:
            for s, pt in great_circle_samples(here, point, self.geodesic_step):
                self._append(robot, start_t + s, pt)
            return self.time(robot)
        d = geo.unchecked_dist(self.metric, here, point)
        self._append(robot, start_t + d, point)
        return self.time(robot)

    def wait_until(self, robot: int, t: float) -> None:
        if t > self.time(robot):
            self._wps[robot].append(Waypoint(t, self.position(robot)))

    def wake(self, waker: int, target: int) -> float:
        if not self.is_active(waker):
            raise ScheduleError(f"waker {waker} is not active")
        if self.is_active(target):
            raise ScheduleError(f"robot {target} is already awake")
        t = self.move(waker, self.positions[target])
        self.wakes.append(WakeEvent(waker, target, t))
        self._activate(target, t)
        return t

    def build(self) -> Schedule:
        trajs = tuple(
            Trajectory(r, self._activation[r], tuple(self._wps[r])) for r in sorted(self._activation)
        )
        wakes = tuple(sorted(self.wakes, key=lambda e: (e.time, e.target_id)))
        return Schedule(self.robots, trajs, wakes)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class Violation:
    rule: str
    robot: int | None
    time: float | None
    detail: str = ""

    def __str__(self):
        where = f"robot {self.robot}" if self.robot is not None else "schedule"
        when = f" at t={self.time:.12g}" if self.time is not None else ""
        return f"{self.rule}: {where}{when} {self.detail}".rstrip()


def position_at(tr: Trajectory, t: float, metric: geo.Metric):
    """Where the robot is at time ``t`` (stationary after the last waypoint)."""
    wps = tr.waypoints
    if t <= wps[0].time:
        return wps[0].position
    times = [w.time for w in wps]
    k = bisect.bisect_right(times, t)
    if k >= len(wps):
        return wps[-1].position
    a, b = wps[k - 1], wps[k]
    frac = (t - a.time) / (b.time - a.time)
    if metric.kind == geo.SPHERE_GEODESIC:
        ang = geo.geodesic(a.position, b.position)
        if ang == 0.0 or math.sin(ang) < 1e-12:
            return a.position if frac < 0.5 else b.position
        return _slerp(a.position, b.position, frac, ang)
    return tuple(pa + frac * (pb - pa) for pa, pb in zip(a.position, b.position))


def verify_positions(positions, metric: geo.Metric, s: Schedule, tolerance: float = geo.DEFAULT_TOL,
                     initially_awake: Sequence[int] = (0,)) -> list[Violation]:
    """Replay ``s`` against robot start positions. Empty list means valid."""
    pos = [tuple(float(c) for c in p) for p in np.asarray(positions, dtype=float)]
    n_robots = len(pos)
    out: list[Violation] = []
    if s.robots != n_robots:
        out.append(Violation("robot-count", None, None, f"schedule has {s.robots} robots, instance {n_robots}"))
        return out

    trajs: dict[int, Trajectory] = {}
    for tr in s.trajectories:
        if not 0 <= tr.robot_id < n_robots:
            out.append(Violation("unknown-robot", tr.robot_id, None))
            continue
        if tr.robot_id in trajs:
            out.append(Violation("duplicate-trajectory", tr.robot_id, None))
            continue
        trajs[tr.robot_id] = tr

    for r in initially_awake:
        tr = trajs.get(r)
        if tr is None:
            out.append(Violation("missing-trajectory", r, 0.0, "initially awake robot has no trajectory"))
        elif abs(tr.activation_time) > tolerance:
            out.append(Violation("source-activation", r, tr.activation_time, "initially awake robot must start at t=0"))

    for r, tr in trajs.items():
        wps = tr.waypoints
        if not wps:
            out.append(Violation("empty-trajectory", r, tr.activation_time))
            continue
        first = wps[0]
        if abs(first.time - tr.activation_time) > tolerance:
            out.append(Violation("bad-initial", r, first.time, "first waypoint time differs from activation"))
        if len(first.position) != len(pos[r]) or math.dist(first.position, pos[r]) > tolerance:
            out.append(Violation("bad-initial", r, first.time, "first waypoint is not the robot's start position"))
        for a, b in zip(wps, wps[1:]):
            dt = b.time - a.time
            if not dt > 0:
                out.append(Violation("non-increasing-time", r, b.time))
                continue
            d = geo.unchecked_dist(metric, a.position, b.position)
            if d > (1.0 + tolerance) * dt:
                out.append(Violation("speed-cap", r, b.time, f"speed {d / dt:.6g} exceeds 1"))

    woken: dict[int, WakeEvent] = {}
    for ev in s.wake_events:
        t = ev.time
        if not 0 <= ev.target_id < n_robots or not 0 <= ev.waker_id < n_robots:
            out.append(Violation("unknown-robot", ev.target_id, t, "wake event refers to unknown robot"))
            continue
        if ev.target_id in initially_awake:
            out.append(Violation("wake-awake-robot", ev.target_id, t, "initially awake robot woken again"))
            continue
        if ev.target_id in woken:
            out.append(Violation("duplicate-wake", ev.target_id, t))
            continue
        woken[ev.target_id] = ev
        wtr = trajs.get(ev.waker_id)
        if wtr is None or wtr.activation_time > t + tolerance:
            out.append(Violation("waker-inactive", ev.waker_id, t, f"cannot wake robot {ev.target_id}"))
        else:
            here = position_at(wtr, t, metric)
            if math.dist(here, pos[ev.target_id]) > tolerance:
                out.append(Violation("wake-position", ev.waker_id, t,
                                     f"not at robot {ev.target_id}'s position"))
        ttr = trajs.get(ev.target_id)
        if ttr is None:
            out.append(Violation("missing-trajectory", ev.target_id, t))
        elif abs(ttr.activation_time - t) > tolerance:
            out.append(Violation("activation-mismatch", ev.target_id, ttr.activation_time,
                                 f"woken at {t!r}"))

    for r in range(n_robots):
        if r in initially_awake:
            continue
        if r not in woken:
            out.append(Violation("unwoken-robot", r, None))
            if r in trajs:
                out.append(Violation("moves-while-asleep", r, trajs[r].activation_time,
                                     "trajectory without a wake event"))
    return out


def verify(inst, s: Schedule, tolerance: float = geo.DEFAULT_TOL) -> list[Violation]:
    return verify_positions(inst.positions, inst.metric, s, tolerance)


# ---------------------------------------------------------------------------
# wake-up trees


@dataclass(frozen=True)
class WakeupTree:
    """``parent[i - 1]`` is the node that wakes robot ``i``; node 0 is the source."""

    parent: tuple[int, ...]
    children: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.parent)
        kids: dict[int, list[int]] = {v: [] for v in range(n + 1)}
        for i, p in enumerate(self.parent, start=1):
            if not 0 <= p <= n or p == i:
                raise ScheduleError(f"robot {i} has invalid parent {p}")
            kids[p].append(i)
        if n and len(kids[0]) != 1:
            raise ScheduleError(f"root must have exactly one child, has {len(kids[0])}")
        for v in range(1, n + 1):
            if len(kids[v]) > 2:
                raise ScheduleError(f"node {v} has {len(kids[v])} children")
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for c in kids[v]:
                seen.add(c)
                stack.append(c)
        if len(seen) != n + 1:
            raise ScheduleError("wake-up tree is not connected to the root")
        object.__setattr__(self, "children", {v: tuple(c) for v, c in kids.items()})

    @property
    def n(self) -> int:
        return len(self.parent)


def wake_times(tree: WakeupTree, positions, metric: geo.Metric) -> list[float]:
    pos = [tuple(float(c) for c in p) for p in np.asarray(positions, dtype=float)]
    times = [0.0] * (tree.n + 1)
    stack = [0]
    while stack:
        v = stack.pop()
        for c in tree.children[v]:
            times[c] = times[v] + geo.unchecked_dist(metric, pos[v], pos[c])
            stack.append(c)
    return times


def weighted_depth(tree: WakeupTree, positions, metric: geo.Metric) -> float:
    return max(wake_times(tree, positions, metric))


def tree_to_schedule(tree: WakeupTree, positions, metric: geo.Metric,
                     geodesic_step: float = DEFAULT_GEODESIC_STEP) -> Schedule:
    """Direct-travel realization of a wake-up tree.

    At a freshly woken node two robots stand together; the newly woken one
    takes the child whose subtree is deeper, the arriving waker the other.
    """
    pos = np.asarray(positions, dtype=float)
    if len(pos) != tree.n + 1:
        raise ScheduleError("tree and position count disagree")
    times = wake_times(tree, pos, metric)
    height = [0.0] * (tree.n + 1)
    order = []
    stack = [0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(tree.children[v])
    for v in reversed(order):
        height[v] = max((times[c] - times[v] + height[c] for c in tree.children[v]), default=0.0)

    b = ScheduleBuilder(pos, metric, geodesic_step)
    # (node, robots standing there that still have work here)
    queue = [(0, [0])]
    while queue:
        v, robots = queue.pop()
        kids = sorted(tree.children[v], key=lambda c: (-(times[c] - times[v] + height[c]), c))
        # robots[-1] is the node's own robot, robots[0] the arriving waker
        for robot, child in zip(reversed(robots), kids):
            b.wake(robot, child)
            queue.append((child, [robot, child]))
    return b.build()


def tree_from_schedule(s: Schedule) -> WakeupTree:
    """Recover who-woke-whom as a tree over node positions.

    The tree parent of a wake is the node where the waker stood when it
    started that leg: its previous target, or its own start node.
    """
    last_node = {}
    parent = [0] * (s.robots - 1)
    for tr in s.trajectories:
        last_node[tr.robot_id] = tr.robot_id
    for ev in sorted(s.wake_events, key=lambda e: e.time):
        parent[ev.target_id - 1] = last_node.get(ev.waker_id, ev.waker_id)
        last_node[ev.waker_id] = ev.target_id
    return WakeupTree(tuple(parent))


# ---------------------------------------------------------------------------
# JSON


def schedule_to_json(s: Schedule) -> str:
    doc = {
        "robots": s.robots,
        "trajectories": [
            {
                "id": tr.robot_id,
                "activation": tr.activation_time,
                "waypoints": [[w.time, *w.position] for w in tr.waypoints],
            }
            for tr in s.trajectories
        ],
        "wakes": [[e.waker_id, e.target_id, e.time] for e in s.wake_events],
    }
    return json.dumps(doc, separators=(",", ":")) + "\n"


def schedule_from_json(text: str) -> Schedule:
    try:
        doc = json.loads(text)
        trajs = tuple(
            Trajectory(
                int(t["id"]),
                float(t["activation"]),
                tuple(Waypoint(float(w[0]), tuple(float(c) for c in w[1:])) for w in t["waypoints"]),
            )
            for t in doc["trajectories"]
        )
        wakes = tuple(WakeEvent(int(a), int(b), float(t)) for a, b, t in doc["wakes"])
        return Schedule(int(doc["robots"]), trajs, wakes)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScheduleError(f"malformed schedule document: {exc}") from None
