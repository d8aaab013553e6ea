"""Exact optimal makespan by dynamic programming over robot subsets.

``V[p][S]``: least time for a single robot standing on node ``p`` to wake
exactly the set ``S`` (with the help of everyone it wakes).
``G[c][T]``: least time for *two* robots standing on node ``c`` to wake
``T``; they split ``T`` into two parts and each handles one part alone.

    V[p][S] = min_{c in S} D[p][c] + G[c][S - {c}]
    G[c][T] = min_{A + B = T} max(V[c][A], V[c][B])

Optimal schedules may be taken to travel straight from wake to wake, so the
optimum over wake-up trees is the optimum over all schedules.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from . import geometry as geo
from .schedule import WakeupTree, weighted_depth

log = logging.getLogger(__name__)

DP_CAP = 16
ENUM_CAP = 8


class CapExceeded(ValueError):
    pass


def memory_estimate(n: int) -> int:
    """Rough byte count of the value and choice tables for ``n`` asleep robots."""
    # four python lists of 2^n slots per node, about 8 bytes per slot pointer
    return 4 * (n + 1) * (1 << n) * 8


def _check_cap(n: int, n_cap: int, default: int) -> None:
    if n > n_cap:
        raise CapExceeded(f"{n} asleep robots exceeds the cap of {n_cap}; raise n_cap explicitly")
    if n_cap > default:
        log.warning("n_cap=%d above default %d: tables may need about %.1f MiB",
                    n_cap, default, memory_estimate(n) / 2**20)


def _distance_matrix(points, metric: geo.Metric) -> list[list[float]]:
    pts = [tuple(float(c) for c in p) for p in np.asarray(points, dtype=float)]
    return [[geo.unchecked_dist(metric, p, q) for q in pts] for p in pts]


def optimal_makespan_points(points, metric: geo.Metric, n_cap: int = DP_CAP) -> tuple[float, WakeupTree]:
    """Optimum for robots at ``points``; row 0 is the awake source."""
    pts = np.asarray(points, dtype=float)
    n = len(pts) - 1
    _check_cap(n, n_cap, DP_CAP)
    if n == 0:
        return 0.0, WakeupTree(())
    D = _distance_matrix(pts, metric)
    full = (1 << n) - 1
    size = 1 << n
    # robot i (1..n) is bit i-1; node index == robot index
    V = [[0.0] * size for _ in range(n + 1)]
    Vc = [[0] * size for _ in range(n + 1)]
    G = [[0.0] * size for _ in range(n + 1)]
    Gc = [[0] * size for _ in range(n + 1)]
    bit_robot = {1 << k: k + 1 for k in range(n)}

    by_count: list[list[int]] = [[] for _ in range(n + 1)]
    for S in range(1, size):
        by_count[bin(S).count("1")].append(S)

    inf = math.inf
    for k in range(1, n + 1):
        for S in by_count[k]:
            members = []
            rest = S
            while rest:
                low = rest & -rest
                members.append((low, bit_robot[low]))
                rest ^= low
            for p in range(n + 1):
                if p and (S >> (p - 1)) & 1:
                    continue
                Dp = D[p]
                best, arg = inf, 0
                for low, c in members:
                    v = Dp[c] + G[c][S ^ low]
                    if v < best:
                        best, arg = v, c
                V[p][S] = best
                Vc[p][S] = arg
        for T in by_count[k]:
            low = T & -T
            rest = T ^ low
            for c in range(1, n + 1):
                if (T >> (c - 1)) & 1:
                    continue
                Vrow = V[c]
                best, arg = inf, 0
                sub = rest
                while True:
                    A = sub | low
                    a, b = Vrow[A], Vrow[T ^ A]
                    v = a if a > b else b
                    if v < best:
                        best, arg = v, A
                    if sub == 0:
                        break
                    sub = (sub - 1) & rest
                G[c][T] = best
                Gc[c][T] = arg

    parent = [0] * (n + 1)
    stack = [(0, full)]
    while stack:
        p, S = stack.pop()
        c = Vc[p][S]
        parent[c] = p
        T = S ^ (1 << (c - 1))
        if T:
            A = Gc[c][T]
            stack.append((c, A))
            if T ^ A:
                stack.append((c, T ^ A))
    tree = WakeupTree(tuple(parent[1:]))
    return weighted_depth(tree, pts, metric), tree


def optimal_makespan(inst, n_cap: int = DP_CAP) -> tuple[float, WakeupTree]:
    return optimal_makespan_points(inst.positions, inst.metric, n_cap)


def exhaustive_points(points, metric: geo.Metric, n_cap: int = ENUM_CAP, prune: bool = True) -> float:
    """Optimum by generating wake-up trees top-down.

    Open slots are expanded first-in first-out: the oldest node with spare
    capacity picks the set of its children among the unplaced robots. Each
    labelled tree arises exactly once. With ``prune`` the search drops any
    partial tree already as deep as the best complete one.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts) - 1
    _check_cap(n, n_cap, ENUM_CAP)
    if n == 0:
        return 0.0
    D = _distance_matrix(pts, metric)
    best = [math.inf]

    def grow(slots, unplaced, depth):
        if not unplaced:
            if depth < best[0]:
                best[0] = depth
            return
        if not slots:
            return
        (v, t, cap), rest = slots[0], slots[1:]
        items = sorted(unplaced)
        choices = [()]
        if cap >= 1:
            choices += [(a,) for a in items]
        if cap >= 2:
            choices += [(a, b) for i, a in enumerate(items) for b in items[i + 1:]]
        for kids in choices:
            new_slots = list(rest)
            d = depth
            for c in kids:
                tc = t + D[v][c]
                if tc > d:
                    d = tc
                new_slots.append((c, tc, 2))
            if prune and d >= best[0]:
                continue
            grow(new_slots, unplaced.difference(kids), d)

    grow([(0, 0.0, 1)], frozenset(range(1, n + 1)), 0.0)
    return best[0]


def exhaustive_tree_enumeration(inst, n_cap: int = ENUM_CAP, prune: bool = True) -> float:
    return exhaustive_points(inst.positions, inst.metric, n_cap, prune)
