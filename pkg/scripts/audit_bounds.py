"""Bulk bound audit for every strategy; prints one line per strategy.

    python3 scripts/audit_bounds.py --trials 2000 --threads 4
"""

import argparse
import json

from freezetag.cli import audit

N_MAX = {"arc": 100, "ring": 100, "combined": 100, "crosspolytope": 2000, "boundary": 100, "surface": 100}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--strategy", action="append", choices=sorted(N_MAX))
    p.add_argument("--json", action="store_true")
    a = p.parse_args()

    failed = 0
    results = []
    for strategy in a.strategy or list(N_MAX):
        doc = audit(strategy, a.trials, N_MAX[strategy], a.seed, a.tolerance, a.threads)
        results.append(doc)
        failed += doc["failures"]
        if not a.json:
            print(f"{strategy:>14}: trials {doc['trials']:>6}  max makespan {doc['max_makespan']:.5f}  "
                  f"failures {doc['failures']}")
    if a.json:
        print(json.dumps(results, indent=1))
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
