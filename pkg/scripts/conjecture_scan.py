"""Interior vs boundary optimal makespans on the unit disk, n = n_min..n_max.

Evidence only. Prints a table; the CLI's ``conjecture-scan`` writes the same
rows to CSV/JSON.

    python3 scripts/conjecture_scan.py --n-max 8 --trials 2000 --threads 4
"""

import argparse

from freezetag.cli import conjecture_scan
from freezetag.instances import DISK_L2


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=7)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed-instance", default=None)
    a = p.parse_args()

    rows = conjecture_scan(DISK_L2, range(a.n_min, a.n_max + 1), a.trials, a.seed, a.threads, a.seed_instance)
    print(f"{'n':>3} {'interior max':>13} {'boundary max':>13}  boundary>=interior")
    for r in rows:
        print(f"{r['n']:>3} {r['interior_max']:>13.5f} {r['boundary_max']:>13.5f}  {r['boundary_ge_interior']}")


if __name__ == "__main__":
    main()
