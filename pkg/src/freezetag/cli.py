"""Command-line front end.

    freezetag gen --space disk-l2 --n 50 --seed 7
    freezetag solve instance.json --strategy combined
    freezetag verify instance.json instance.combined.schedule.json
    freezetag sweep --epsilon 0.01
    freezetag conjecture-scan --n 5 --trials 1000 --seed 1
    freezetag plot instance.json --schedule instance.combined.schedule.json

Global flags (--tolerance, --threads, --json, --out-dir) may also be set
through FREEZETAG_TOLERANCE, FREEZETAG_THREADS, FREEZETAG_JSON and
FREEZETAG_OUT_DIR; flags take precedence.

Exit codes: 0 ok, 2 usage or parse error, 3 verification or bound failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import crosspolytope, disk, exact, sphere
from . import geometry as geo
from .instances import (
    BALL_L1_R3,
    DISK_L2,
    SPHERE_BOUNDARY,
    SPHERE_SURFACE,
    Instance,
    InstanceError,
    canonical_space,
    fixture_names,
    gen_equally_spaced_circle,
    gen_random,
    load_instance,
    paper_instance,
    points_csv,
    serialize_instance,
)
from .plot import PlotError, render_svg
from .schedule import ScheduleError, schedule_from_json, schedule_to_json, tree_to_schedule, verify

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 2, 3

STRATEGIES = {
    "arc": (DISK_L2,),
    "ring": (DISK_L2,),
    "combined": (DISK_L2,),
    "crosspolytope": (BALL_L1_R3,),
    "boundary": (SPHERE_BOUNDARY,),
    "surface": (SPHERE_SURFACE,),
    "exact": (DISK_L2, BALL_L1_R3, SPHERE_BOUNDARY, SPHERE_SURFACE),
}


class UsageError(Exception):
    pass


def _env(name: str, default):
    return os.environ.get("FREEZETAG_" + name, default)


def _env_flag(name: str) -> bool:
    return str(_env(name, "")).strip().lower() in ("1", "true", "yes", "on")


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# run bookkeeping


class Run:
    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.out_dir = Path(args.out_dir)
        self.artifacts: list[str] = []
        self.seeds: list[int] = []
        self.t0 = time.perf_counter()

    def path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def write(self, path, text: str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.artifacts.append(str(path))
        return path

    def manifest(self) -> None:
        doc = {
            "command": self.args.command,
            "argv": self.argv,
            "seeds": self.seeds,
            "artifacts": self.artifacts,
            "wall_clock_s": round(time.perf_counter() - self.t0, 6),
            "version": __version__,
        }
        p = self.path(f"manifest.{self.args.command}.json")
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps(doc))

    def emit(self, doc: dict, text: str) -> None:
        print(dumps(doc) if self.args.json else text, end="" if self.args.json else "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_gen(run: Run) -> int:
    a = run.args
    if a.paper:
        if a.paper not in fixture_names():
            raise UsageError(f"unknown fixture {a.paper!r}; known: {', '.join(fixture_names())}")
        inst = paper_instance(a.paper)
    elif a.circle is not None:
        inst = gen_equally_spaced_circle(a.circle)
    else:
        if a.space is None or a.n is None or a.seed is None:
            raise UsageError("gen needs --paper, --circle, or all of --space/--n/--seed")
        boundary = None if a.boundary is None else a.boundary
        inst = gen_random(canonical_space(a.space), a.n, a.seed, on_boundary=boundary)
        run.seeds.append(a.seed)
    out = Path(a.output) if a.output else run.path((inst.name or "instance") + ".json")
    run.write(out, serialize_instance(inst))
    if a.csv:
        run.write(out.with_suffix(".csv"), points_csv(inst))
    run.emit({"instance": str(out), "space": inst.space, "n": inst.n}, f"wrote {out} ({inst.n} asleep robots)")
    return EXIT_OK


def solve_instance(inst: Instance, strategy: str, tolerance: float):
    """Dispatch one strategy; returns (schedule, report dict)."""
    if strategy not in STRATEGIES:
        raise UsageError(f"unknown strategy {strategy!r}")
    if inst.space not in STRATEGIES[strategy]:
        raise UsageError(f"strategy {strategy} does not apply to {inst.space} instances")
    if strategy == "exact":
        try:
            value, tree = exact.optimal_makespan(inst)
        except exact.CapExceeded as exc:
            raise UsageError(str(exc)) from None
        s = tree_to_schedule(tree, inst.positions, inst.metric)
        report = disk.StrategyReport("exact", value, None, details={"parent": list(tree.parent)})
    elif strategy == "arc":
        s, report = disk.arc_strategy(inst, disk.DiskConfig(tolerance=tolerance))
    elif strategy == "ring":
        s, report = disk.disk_ring_strategy(inst, disk.DiskConfig(tolerance=tolerance))
    elif strategy == "combined":
        s, report = disk.combined_strategy(inst, disk.DiskConfig(tolerance=tolerance))
    elif strategy == "crosspolytope":
        s, report = crosspolytope.crosspolytope_strategy(inst, tolerance)
    elif strategy == "boundary":
        s, report = sphere.boundary_strategy(inst, sphere.SphereConfig(tolerance=tolerance))
    else:
        s, report = sphere.surface_strategy(inst, sphere.SphereConfig(tolerance=tolerance))
    violations = verify(inst, s, tolerance)
    doc = {"instance": inst.name, "n": inst.n, **report.to_dict()}
    doc["verify"] = "ok" if not violations else [str(v) for v in violations]
    if report.traces:
        doc["trace_violations"] = sum(len(t.violations(tolerance)) for t in report.traces)
    return s, doc


def report_passes(doc: dict, tolerance: float) -> bool:
    if doc["verify"] != "ok" or doc.get("trace_violations", 0):
        return False
    return doc["bound"] is None or doc["margin"] >= -tolerance


def _load(path) -> Instance:
    try:
        return load_instance(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def cmd_solve(run: Run) -> int:
    a = run.args
    inst = _load(a.instance)
    s, doc = solve_instance(inst, a.strategy, a.tolerance)
    prefix = a.output or str(run.path(f"{Path(a.instance).stem}.{a.strategy}"))
    run.write(prefix + ".schedule.json", schedule_to_json(s))
    run.write(prefix + ".report.json", dumps(doc))
    ok = report_passes(doc, a.tolerance)
    bound = "n/a" if doc["bound"] is None else f"{doc['bound']:.4f}"
    run.emit(doc, f"{a.strategy}: makespan {doc['makespan']:.6f}  bound {bound}  verify {'ok' if doc['verify'] == 'ok' else 'FAILED'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(run: Run) -> int:
    a = run.args
    inst = _load(a.instance)
    try:
        with open(a.schedule, encoding="utf-8") as fh:
            s = schedule_from_json(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {a.schedule}: {exc}") from None
    violations = verify(inst, s, a.tolerance)
    doc = {"ok": not violations, "violations": [str(v) for v in violations]}
    run.emit(doc, "ok" if not violations else "\n".join(doc["violations"]))
    return EXIT_OK if not violations else EXIT_FAIL


def cmd_sweep(run: Run) -> int:
    a = run.args
    try:
        rep = sphere.sweep_geodesic_ratio(a.epsilon, threads=a.threads, full=a.full_csv)
    except sphere.SphereError as exc:
        raise UsageError(str(exc)) from None
    stem = f"sweep-eps{a.epsilon:g}"
    run.write(run.path(stem + ".csv"), rep.csv())
    run.write(run.path(stem + ".json"), rep.summary_json())
    run.emit(rep.summary(), f"eps={a.epsilon:g} cells={rep.cells} max ratio={rep.max_ratio!r} violations={rep.violations}")
    return EXIT_OK if rep.violations == 0 else EXIT_FAIL


def _trial_seed(seed: int, n: int, trial: int, kind: int) -> int:
    return int(np.random.SeedSequence([seed, n, trial, kind]).generate_state(1)[0])


def _scan_trial(job):
    space, n, s, boundary = job
    inst = gen_random(space, n, s, on_boundary=boundary)
    return exact.optimal_makespan(inst)[0]


def _jittered_fixture(name: str, n: int, seed: int, trial: int, sigma: float) -> Instance:
    base = paper_instance(name)
    rng = np.random.default_rng(_trial_seed(seed, n, trial, 2))
    ang = np.arctan2(base.asleep[:, 1], base.asleep[:, 0]) + rng.normal(0.0, sigma, base.n)
    return Instance(DISK_L2, np.zeros(2), np.column_stack([np.cos(ang), np.sin(ang)]), name=f"{name}-jitter")


def conjecture_scan(space: str, ns, trials: int, seed: int, threads: int = 1,
                    seed_instance: str | None = None, jitter: float = 0.01) -> list[dict]:
    rows = []
    for n in ns:
        if n > exact.DP_CAP:
            raise UsageError(f"n={n} exceeds the exact solver cap {exact.DP_CAP}")
        if trials <= 0:
            continue
        jobs = [(space, n, _trial_seed(seed, n, t, kind), kind == 1) for kind in (0, 1) for t in range(trials)]
        if threads > 1:
            with ProcessPoolExecutor(threads) as pool:
                values = list(pool.map(_scan_trial, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
        else:
            values = [_scan_trial(j) for j in jobs]
        interior, boundary = values[:trials], values[trials:]
        row = {
            "n": n,
            "trials": trials,
            "interior_max": max(interior),
            "interior_argmax_trial": int(np.argmax(interior)),
            "boundary_max": max(boundary),
            "boundary_argmax_trial": int(np.argmax(boundary)),
        }
        if seed_instance is not None and paper_instance(seed_instance).n == n:
            seeded = [exact.optimal_makespan(paper_instance(seed_instance))[0]]
            seeded += [exact.optimal_makespan(_jittered_fixture(seed_instance, n, seed, t, jitter))[0]
                       for t in range(trials)]
            row["seeded_max"] = max(seeded)
            row["boundary_max"] = max(row["boundary_max"], row["seeded_max"])
        row["boundary_ge_interior"] = row["boundary_max"] >= row["interior_max"]
        rows.append(row)
    return rows


def cmd_conjecture_scan(run: Run) -> int:
    a = run.args
    space = canonical_space(a.space)
    if space != DISK_L2:
        raise UsageError("the conjecture scan is defined for disk_l2")
    ns = list(range(a.n_min, a.n_max + 1)) if a.n is None else [a.n]
    run.seeds.append(a.seed)
    rows = conjecture_scan(space, ns, a.trials, a.seed, a.threads, a.seed_instance, a.jitter)
    cols = ["n", "trials", "interior_max", "boundary_max", "boundary_ge_interior"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
    stem = f"conjecture-{space}-seed{a.seed}"
    run.write(run.path(stem + ".csv"), buf.getvalue())
    run.write(run.path(stem + ".json"), dumps(rows))
    lines = [f"n={r['n']:>2}  interior max {r['interior_max']:.4f}  boundary max {r['boundary_max']:.4f}" for r in rows]
    run.emit({"rows": rows}, "\n".join(lines) if lines else "no trials")
    return EXIT_OK


def cmd_plot(run: Run) -> int:
    a = run.args
    inst = _load(a.instance)
    s = None
    if a.schedule:
        with open(a.schedule, encoding="utf-8") as fh:
            s = schedule_from_json(fh.read())
    try:
        svg = render_svg(inst, s, a.projection)
    except PlotError as exc:
        raise UsageError(str(exc)) from None
    out = Path(a.output) if a.output else run.path(Path(a.instance).stem + ".svg")
    run.write(out, svg)
    run.emit({"svg": str(out)}, f"wrote {out}")
    return EXIT_OK


def audit(strategy: str, trials: int, n_max: int, seed: int, tolerance: float, threads: int = 1) -> dict:
    space = {"arc": DISK_L2, "ring": DISK_L2, "combined": DISK_L2, "crosspolytope": BALL_L1_R3,
             "boundary": SPHERE_BOUNDARY, "surface": SPHERE_SURFACE}[strategy]
    jobs = [(strategy, space, 1 + t % n_max, _trial_seed(seed, 0, t, 3), tolerance) for t in range(trials)]
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            rows = list(pool.map(_audit_one, jobs, chunksize=max(1, trials // (4 * threads))))
    else:
        rows = [_audit_one(j) for j in jobs]
    failed = [r for r in rows if not r["pass"]]
    worst = max(rows, key=lambda r: r["makespan"]) if rows else None
    return {
        "strategy": strategy,
        "trials": trials,
        "max_makespan": worst["makespan"] if worst else 0.0,
        "worst_seed": worst["seed"] if worst else None,
        "failures": len(failed),
        "failed_seeds": [r["seed"] for r in failed],
    }


def _audit_one(job) -> dict:
    strategy, space, n, s, tol = job
    _, doc = solve_instance(gen_random(space, n, s), strategy, tol)
    return {"seed": s, "n": n, "makespan": doc["makespan"], "pass": report_passes(doc, tol)}


def cmd_audit(run: Run) -> int:
    a = run.args
    run.seeds.append(a.seed)
    doc = audit(a.strategy, a.trials, a.n_max, a.seed, a.tolerance, a.threads)
    run.write(run.path(f"audit-{a.strategy}-seed{a.seed}.json"), dumps(doc))
    run.emit(doc, f"{a.strategy}: {a.trials} trials, max makespan {doc['max_makespan']:.6f}, failures {doc['failures']}")
    return EXIT_OK if doc["failures"] == 0 else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def _globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--tolerance", type=float, default=d(float(_env("TOLERANCE", geo.DEFAULT_TOL))))
    p.add_argument("--threads", type=int, default=d(int(_env("THREADS", 1))))
    p.add_argument("--json", action="store_true", default=d(_env_flag("JSON")))
    p.add_argument("--out-dir", default=d(_env("OUT_DIR", ".")))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freezetag", description="Freeze-tag wake-up strategies and tools.")
    p.add_argument("--version", action="version", version=__version__)
    _globals(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _globals(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write an instance file")
    g.add_argument("--space")
    g.add_argument("--n", type=int)
    g.add_argument("--seed", type=int)
    b = g.add_mutually_exclusive_group()
    b.add_argument("--boundary", dest="boundary", action="store_true", default=None)
    b.add_argument("--interior", dest="boundary", action="store_false")
    g.add_argument("--paper", help="embedded fixture: " + ", ".join(fixture_names()))
    g.add_argument("--circle", type=int, help="n equally spaced robots on the unit circle")
    g.add_argument("--csv", action="store_true", help="also write the point table (planar only)")
    g.add_argument("-o", "--output")

    s = sub.add_parser("solve", parents=[common], help="run a strategy and verify it")
    s.add_argument("instance")
    s.add_argument("--strategy", required=True, choices=sorted(STRATEGIES))
    s.add_argument("-o", "--output", help="output prefix")

    v = sub.add_parser("verify", parents=[common], help="check a schedule against an instance")
    v.add_argument("instance")
    v.add_argument("schedule")

    w = sub.add_parser("sweep", parents=[common], help="geodesic vs flattened distance grid")
    w.add_argument("--epsilon", type=float, required=True)
    w.add_argument("--full-csv", action="store_true", help="one CSV row per grid cell")

    c = sub.add_parser("conjecture-scan", parents=[common], help="interior vs boundary optimal makespans")
    c.add_argument("--space", default="disk-l2")
    c.add_argument("--n", type=int)
    c.add_argument("--n-min", type=int, default=2)
    c.add_argument("--n-max", type=int, default=6)
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--seed-instance", choices=fixture_names())
    c.add_argument("--jitter", type=float, default=0.01, help="angle noise (radians) for seeded trials")

    pl = sub.add_parser("plot", parents=[common], help="render an SVG")
    pl.add_argument("instance")
    pl.add_argument("--schedule")
    pl.add_argument("--projection", choices=sorted(("xy", "xz", "yz")))
    pl.add_argument("-o", "--output")

    au = sub.add_parser("audit", parents=[common], help="bulk bound audit on random instances")
    au.add_argument("--strategy", required=True, choices=["arc", "ring", "combined", "crosspolytope", "boundary", "surface"])
    au.add_argument("--trials", type=int, default=100)
    au.add_argument("--n-max", type=int, default=100)
    au.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "conjecture-scan": cmd_conjecture_scan,
    "plot": cmd_plot,
    "audit": cmd_audit,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1 or not (args.tolerance >= 0 and math.isfinite(args.tolerance)):
        print("freezetag: --threads must be >= 1 and --tolerance finite and nonnegative", file=sys.stderr)
        return EXIT_USAGE
    run = Run(args, argv)
    try:
        code = COMMANDS[args.command](run)
    except (UsageError, InstanceError, ScheduleError, PlotError, geo.GeometryError) as exc:
        print(f"freezetag: {exc}", file=sys.stderr)
        return EXIT_USAGE
    run.manifest()
    return code
