"""Wake-up rounds shared by several strategies: every free robot walks to a
nearby asleep robot and wakes it, so the awake population doubles."""

from __future__ import annotations

import heapq

import numpy as np

from . import geometry as geo
from .schedule import ScheduleBuilder


def _distances(builder: ScheduleBuilder, pos: np.ndarray, robot: int) -> np.ndarray:
    here = np.asarray(builder.position(robot))
    diff = np.abs(pos - here)
    if builder.metric.kind == geo.L1:
        return diff.sum(axis=1)
    if builder.metric.kind == geo.L2:
        return np.sqrt((diff * diff).sum(axis=1))
    return np.array([geo.geodesic(here, p) for p in pos])


def doubling_rounds(builder: ScheduleBuilder, awake, targets, limit: int | None = None) -> list[int]:
    """Event-driven doubling: whenever a robot becomes free it walks to the
    nearest still-unclaimed target (ties by index) and wakes it.

    Free robots are served in order of (ready time, id). Stops after
    ``limit`` wakes if given. Returns the woken robots in claim order.
    """
    targets = sorted(targets)
    if not targets:
        return []
    pos = np.array([builder.positions[t] for t in targets])
    ids = np.array(targets)
    alive = np.ones(len(targets), dtype=bool)
    remaining = len(targets) if limit is None else min(limit, len(targets))
    heap = [(builder.time(r), r) for r in awake]
    heapq.heapify(heap)
    woken = []
    while heap and remaining:
        _, r = heapq.heappop(heap)
        d = _distances(builder, pos, r)
        d[~alive] = np.inf
        k = int(np.argmin(d))  # argmin keeps the first, i.e. lowest id, on ties
        alive[k] = False
        remaining -= 1
        t = int(ids[k])
        builder.wake(r, t)
        woken.append(t)
        heapq.heappush(heap, (builder.time(r), r))
        heapq.heappush(heap, (builder.time(t), t))
    return woken


def matched_rounds(builder: ScheduleBuilder, awake, targets) -> list[int]:
    """Synchronous rounds: in each round every awake robot, in order of
    (ready time, id), claims at most one nearest unclaimed target. A round
    therefore ends within one diameter of its latest ready time."""
    targets = sorted(targets)
    if not targets:
        return []
    pos = np.array([builder.positions[t] for t in targets])
    alive = np.ones(len(targets), dtype=bool)
    crew = list(awake)
    woken = []
    while alive.any():
        crew.sort(key=lambda r: (builder.time(r), r))
        fresh = []
        for r in crew:
            if not alive.any():
                break
            d = _distances(builder, pos, r)
            d[~alive] = np.inf
            k = int(np.argmin(d))
            alive[k] = False
            builder.wake(r, targets[k])
            fresh.append(targets[k])
        woken += fresh
        crew += fresh
    return woken
