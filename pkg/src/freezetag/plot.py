"""Minimal deterministic SVG rendering of an instance and its wake-up arrows."""

from __future__ import annotations

from .instances import BALL_L1_R3, DISK_L2, Instance
from .schedule import Schedule, tree_from_schedule

SIZE = 400
SCALE = 170.0
PROJECTIONS = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}


class PlotError(ValueError):
    pass


def _xy(p, axes) -> tuple[float, float]:
    return SIZE / 2 + SCALE * p[axes[0]], SIZE / 2 - SCALE * p[axes[1]]


def _f(v: float) -> str:
    return f"{v:.3f}"


def render_svg(inst: Instance, schedule: Schedule | None = None, projection: str | None = None) -> str:
    if inst.dimension == 3 and projection is None:
        raise PlotError(f"{inst.space} instances need a projection (xy, xz or yz)")
    if projection is not None and projection not in PROJECTIONS:
        raise PlotError(f"unknown projection {projection!r}")
    axes = (0, 1) if inst.dimension == 2 else PROJECTIONS[projection]
    c = SIZE / 2
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="6" markerHeight="6" '
        'orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" fill="#555"/></marker></defs>',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    if inst.space == BALL_L1_R3:
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in ((c + SCALE, c), (c, c - SCALE), (c - SCALE, c), (c, c + SCALE)))
        out.append(f'<polygon class="region" points="{pts}" fill="none" stroke="black"/>')
    else:
        out.append(f'<circle class="region" cx="{_f(c)}" cy="{_f(c)}" r="{_f(SCALE)}" fill="none" stroke="black"/>')
    pos = inst.positions
    if schedule is not None:
        if schedule.robots != len(pos):
            raise PlotError("schedule and instance disagree on the robot count")
        tree = tree_from_schedule(schedule)
        for ev in schedule.wake_events:
            x1, y1 = _xy(pos[tree.parent[ev.target_id - 1]], axes)
            x2, y2 = _xy(pos[ev.target_id], axes)
            out.append(f'<line class="wake" x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                       'stroke="#555" marker-end="url(#arrow)"/>')
    for i, p in enumerate(pos):
        x, y = _xy(p, axes)
        cls, fill = ("source", "red") if i == 0 else ("robot", "steelblue")
        out.append(f'<circle class="{cls}" cx="{_f(x)}" cy="{_f(y)}" r="4" fill="{fill}"/>')
        if inst.space == DISK_L2 and i > 0 and inst.n <= 30:
            out.append(f'<text x="{_f(x + 6)}" y="{_f(y - 6)}" font-size="11">p{i}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
