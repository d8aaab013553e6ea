"""Metrics, polar conversions and small geometric predicates.

Everything here is a pure function of its inputs. Points are plain tuples or
1-d numpy arrays of length 2 or 3; nothing is mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
DEFAULT_TOL = 1e-9

L1 = "L1"
L2 = "L2"
SPHERE_GEODESIC = "SphereGeodesic"


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Metric:
    kind: str
    dimension: int

    def __post_init__(self):
        if self.kind not in (L1, L2, SPHERE_GEODESIC):
            raise GeometryError(f"unknown metric kind {self.kind!r}")
        if self.dimension not in (2, 3):
            raise GeometryError(f"unsupported dimension {self.dimension}")
        if self.kind == SPHERE_GEODESIC and self.dimension != 3:
            raise GeometryError("SphereGeodesic requires dimension 3")

    def __call__(self, p, q) -> float:
        return dist(self, p, q)

    def pairwise(self, points) -> np.ndarray:
        """Symmetric distance matrix for an (m, dim) array of points."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dimension:
            raise GeometryError(f"expected (m, {self.dimension}) points, got {pts.shape}")
        m = len(pts)
        out = np.zeros((m, m))
        for i in range(m):
            for j in range(i + 1, m):
                out[i, j] = out[j, i] = dist(self, pts[i], pts[j])
        return out


DISK_L2 = Metric(L2, 2)
BALL_L1 = Metric(L1, 3)
SPACE_L2 = Metric(L2, 3)
SPHERE = Metric(SPHERE_GEODESIC, 3)


def _check(metric: Metric, p) -> None:
    if len(p) != metric.dimension:
        raise GeometryError(f"point {tuple(p)} has dimension {len(p)}, metric expects {metric.dimension}")
    if metric.kind == SPHERE_GEODESIC:
        norm = math.sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
        if abs(norm - 1.0) > DEFAULT_TOL:
            raise GeometryError(f"point {tuple(p)} is not on the unit sphere (norm {norm!r})")


def geodesic(p, q) -> float:
    # atan2 form: exact zero for identical operands, no loss near 0 or pi
    cx = p[1] * q[2] - p[2] * q[1]
    cy = p[2] * q[0] - p[0] * q[2]
    cz = p[0] * q[1] - p[1] * q[0]
    dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2]
    return math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), dot)


def dist(metric: Metric, p: Sequence[float], q: Sequence[float]) -> float:
    _check(metric, p)
    _check(metric, q)
    if metric.kind == L2:
        return math.dist(p, q)
    if metric.kind == L1:
        return sum(abs(a - b) for a, b in zip(p, q))
    return geodesic(p, q)


def unchecked_dist(metric: Metric, p, q) -> float:
    """`dist` without operand validation, for hot loops over trusted points."""
    if metric.kind == L2:
        return math.dist(p, q)
    if metric.kind == L1:
        return sum(abs(a - b) for a, b in zip(p, q))
    return geodesic(p, q)


def norm(metric_kind: str, p) -> float:
    if metric_kind == L1:
        return float(sum(abs(c) for c in p))
    return math.sqrt(sum(c * c for c in p))


@dataclass(frozen=True)
class PolarPoint:
    radius: float
    angle: float

    def __post_init__(self):
        if self.radius < 0:
            raise GeometryError(f"negative radius {self.radius}")


def normalize_angle(theta: float) -> float:
    a = math.fmod(theta, TWO_PI)
    if a < 0:
        a += TWO_PI
    # fmod of a tiny negative can round up to exactly 2*pi
    return 0.0 if a >= TWO_PI else a


def to_polar(p) -> PolarPoint:
    x, y = float(p[0]), float(p[1])
    return PolarPoint(math.hypot(x, y), normalize_angle(math.atan2(y, x)))


def from_polar(pp: PolarPoint) -> tuple[float, float]:
    return (pp.radius * math.cos(pp.angle), pp.radius * math.sin(pp.angle))


def project_to_circle(p, center, radius: float) -> tuple[float, ...]:
    """Intersection of the ray center->p with the circle C(center, radius)."""
    if radius < 0:
        raise GeometryError("radius must be nonnegative")
    v = [a - b for a, b in zip(p, center)]
    length = math.sqrt(sum(c * c for c in v))
    if length == 0.0:
        raise GeometryError("projection undefined for p equal to the center")
    return tuple(c + radius * vc / length for c, vc in zip(center, v))


def angle_between(u, v) -> float:
    """Unsigned angle in [0, pi] between two planar vectors; 0 if either is null."""
    cross = u[0] * v[1] - u[1] * v[0]
    dot = u[0] * v[0] + u[1] * v[1]
    if cross == 0.0 and dot == 0.0:
        return 0.0
    return abs(math.atan2(cross, dot))


def sphere_point(delta: float, theta: float) -> tuple[float, float, float]:
    """Unit vector at polar distance delta from (0,0,1) and azimuth theta."""
    s = math.sin(delta)
    return (s * math.cos(theta), s * math.sin(theta), math.cos(delta))


def sphere_chord_from_pairs(delta1: float, delta2: float, dtheta: float) -> float:
    """Chord length between two unit-sphere points given by polar distance
    from a common pole and their azimuth difference.

    Uses the isosceles-trapezoid decomposition, which stays accurate for
    nearly coincident points where the law of cosines cancels badly.
    """
    for name, v in (("delta1", delta1), ("delta2", delta2), ("dtheta", dtheta)):
        if not (0.0 <= v <= math.pi):
            raise GeometryError(f"{name}={v} outside [0, pi]")
    sd = math.sin(abs(delta1 - delta2) / 2.0)
    st = math.sin(dtheta / 2.0)
    return 2.0 * math.sqrt(sd * sd + math.sin(delta1) * math.sin(delta2) * st * st)


# ---------------------------------------------------------------------------
# l1 helpers used by the cross-polytope code


def l1_norm(v) -> float:
    return float(np.abs(np.asarray(v, dtype=float)).sum())
