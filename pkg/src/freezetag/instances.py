"""Problem instances: the data type, seeded generators, built-in fixtures and
the JSON / CSV file formats.

Random instances use numpy's PCG64 bit generator (``np.random.default_rng``)
seeded with the integer seed, so an instance is reproducible from
``(space, n, seed, on_boundary)`` on any platform running numpy >= 1.17.

Sampling schemes:

* disk interior: radius ``sqrt(U)``, angle ``2*pi*U``; disk boundary: angle only.
* l1 ball interior: exponential spacings, i.e. the first three coordinates of
  a flat Dirichlet(1,1,1,1) draw with independent random signs; l1 sphere:
  Dirichlet(1,1,1) with random signs.
* sphere: normalized standard-normal triples.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo

DISK_L2 = "disk_l2"
BALL_L1_R3 = "ball_l1_r3"
SPHERE_BOUNDARY = "sphere_boundary"
SPHERE_SURFACE = "sphere_surface"
SPACES = (DISK_L2, BALL_L1_R3, SPHERE_BOUNDARY, SPHERE_SURFACE)

CONTAINMENT_TOL = 1e-9


class InstanceError(ValueError):
    pass


def canonical_space(name: str) -> str:
    """Accept CLI spellings such as ``disk-l2``."""
    key = name.strip().lower().replace("-", "_")
    if key not in SPACES:
        raise InstanceError(f"unknown space {name!r}; expected one of {', '.join(SPACES)}")
    return key


def space_dimension(space: str) -> int:
    return 2 if space == DISK_L2 else 3


def space_metric(space: str) -> geo.Metric:
    return {
        DISK_L2: geo.DISK_L2,
        BALL_L1_R3: geo.BALL_L1,
        SPHERE_BOUNDARY: geo.SPACE_L2,
        SPHERE_SURFACE: geo.SPHERE,
    }[space]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """One awake source robot plus ``n`` asleep robots in a unit region."""

    space: str
    source: np.ndarray
    asleep: np.ndarray
    name: str = ""
    seed: int | None = None
    metric: geo.Metric = field(init=False, repr=False)

    def __post_init__(self):
        space = canonical_space(self.space)
        dim = space_dimension(space)
        source = _frozen(self.source)
        asleep = np.array(self.asleep, dtype=float)
        if asleep.size == 0:
            asleep = np.zeros((0, dim))
        asleep = _frozen(asleep)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "asleep", asleep)
        object.__setattr__(self, "metric", space_metric(space))
        if source.shape != (dim,):
            raise InstanceError(f"source must have {dim} coordinates, got shape {source.shape}")
        if asleep.ndim != 2 or asleep.shape[1] != dim:
            raise InstanceError(f"asleep robots must be an (n, {dim}) array, got shape {asleep.shape}")
        if not (np.all(np.isfinite(source)) and np.all(np.isfinite(asleep))):
            raise InstanceError("coordinates must be finite")
        if space == SPHERE_SURFACE:
            if abs(np.linalg.norm(source) - 1.0) > CONTAINMENT_TOL:
                raise InstanceError("surface source robot must lie on the unit sphere")
        elif np.any(source != 0.0):
            raise InstanceError(f"source robot must sit at the origin for space {space}")
        for i, p in enumerate(asleep):
            if not _contained(space, p):
                raise InstanceError(f"asleep robot {i + 1} at {p.tolist()} lies outside the {space} region")

    @property
    def n(self) -> int:
        return len(self.asleep)

    @property
    def dimension(self) -> int:
        return space_dimension(self.space)

    @property
    def positions(self) -> np.ndarray:
        """All robots, source first: row ``i`` is robot ``i``."""
        return np.vstack([self.source[None, :], self.asleep])

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.space == other.space
            and self.name == other.name
            and self.seed == other.seed
            and np.array_equal(self.source, other.source)
            and np.array_equal(self.asleep, other.asleep)
        )


def _contained(space: str, p) -> bool:
    if space == DISK_L2:
        return math.hypot(p[0], p[1]) <= 1.0 + CONTAINMENT_TOL
    if space == BALL_L1_R3:
        return abs(p[0]) + abs(p[1]) + abs(p[2]) <= 1.0 + CONTAINMENT_TOL
    return abs(math.sqrt(p[0] ** 2 + p[1] ** 2 + p[2] ** 2) - 1.0) <= CONTAINMENT_TOL


# ---------------------------------------------------------------------------
# generators


def _unit_sphere(rng, n):
    g = rng.standard_normal((n, 3))
    return g / np.linalg.norm(g, axis=1)[:, None]


def gen_random(space: str, n: int, seed: int, on_boundary: bool | None = None) -> Instance:
    space = canonical_space(space)
    if n < 0:
        raise InstanceError("n must be nonnegative")
    sphere = space in (SPHERE_BOUNDARY, SPHERE_SURFACE)
    if on_boundary is None:
        on_boundary = sphere
    if sphere and not on_boundary:
        raise InstanceError(f"{space} robots always lie on the sphere; on_boundary=False is invalid")
    rng = np.random.default_rng(seed)

    if space == DISK_L2:
        theta = rng.uniform(0.0, geo.TWO_PI, n)
        r = np.ones(n) if on_boundary else np.sqrt(rng.uniform(0.0, 1.0, n))
        pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        source = np.zeros(2)
    elif space == BALL_L1_R3:
        if on_boundary:
            w = rng.dirichlet(np.ones(3), n) if n else np.zeros((0, 3))
        else:
            w = rng.dirichlet(np.ones(4), n)[:, :3] if n else np.zeros((0, 3))
        signs = rng.choice([-1.0, 1.0], size=(n, 3))
        pts = w * signs
        source = np.zeros(3)
    elif space == SPHERE_BOUNDARY:
        pts = _unit_sphere(rng, n)
        source = np.zeros(3)
    else:
        source = _unit_sphere(rng, 1)[0]
        pts = _unit_sphere(rng, n)
    kind = "boundary" if on_boundary else "interior"
    return Instance(space, source, pts.reshape(n, space_dimension(space)), name=f"random-{space}-{kind}-n{n}", seed=seed)


def gen_equally_spaced_circle(n: int) -> Instance:
    if n < 1:
        raise InstanceError("need at least one robot")
    ang = geo.TWO_PI * np.arange(n) / n
    pts = np.column_stack([np.cos(ang), np.sin(ang)])
    return Instance(DISK_L2, np.zeros(2), pts, name=f"circle-n{n}")


# Coordinates exactly as tabulated (3 decimals); the angle column is derived.
_FIXTURES = {
    "fig5-n5": [
        (0.954, 0.298),
        (-0.108, 0.994),
        (-0.995, 0.097),
        (-0.768, -0.639),
        (0.488, -0.872),
    ],
    "fig5-n7": [
        (0.852, 0.522),
        (-0.207, 0.978),
        (-0.856, 0.516),
        (-0.962, -0.270),
        (-0.698, -0.715),
        (0.028, -0.999),
        (0.846, -0.531),
    ],
}

FIXTURE_ANGLES_DEG = {
    "fig5-n5": (17.37, 96.22, 174.42, 219.75, 299.27),
    "fig5-n7": (31.52, 101.98, 148.90, 195.69, 225.69, 271.63, 327.87),
}


def paper_instance(name: str) -> Instance:
    try:
        pts = _FIXTURES[name]
    except KeyError:
        raise InstanceError(f"unknown fixture {name!r}; known: {', '.join(sorted(_FIXTURES))}") from None
    return Instance(DISK_L2, np.zeros(2), pts, name=name)


def fixture_names() -> list[str]:
    return sorted(_FIXTURES)


# ---------------------------------------------------------------------------
# serialization


def serialize_instance(inst: Instance) -> str:
    doc = {
        "space": inst.space,
        "source": [float(c) for c in inst.source],
        "asleep": [[float(c) for c in p] for p in inst.asleep],
        "name": inst.name,
        "seed": inst.seed,
    }
    return json.dumps(doc, indent=1) + "\n"


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed instance document: {exc}") from None
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    missing = [k for k in ("space", "source", "asleep") if k not in doc]
    if missing:
        raise InstanceError(f"instance document lacks field(s): {', '.join(missing)}")
    seed = doc.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise InstanceError("seed must be an integer or null")
    try:
        asleep = np.array(doc["asleep"], dtype=float)
        source = np.array(doc["source"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"bad coordinates: {exc}") from None
    return Instance(doc["space"], source, asleep, name=str(doc.get("name", "")), seed=seed)


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def points_csv(inst: Instance) -> str:
    """Point table with columns ``point, theta_deg, x, y`` (planar instances)."""
    if inst.dimension != 2:
        raise InstanceError("point tables are only defined for planar instances")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["point", "theta_deg", "x", "y"])
    for i, (x, y) in enumerate(inst.asleep, start=1):
        theta = math.degrees(geo.to_polar((x, y)).angle)
        w.writerow([f"p{i}", f"{theta:.2f}", repr(float(x)), repr(float(y))])
    return buf.getvalue()
