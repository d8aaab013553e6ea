"""Geodesic vs flattened distance over the (delta1, delta2, dtheta) grid.

    python3 scripts/geodesic_sweep.py 0.01 0.005 0.001
"""

import argparse
import time

from freezetag.sphere import sweep_geodesic_ratio


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("epsilon", type=float, nargs="+")
    p.add_argument("--threads", type=int, default=1)
    a = p.parse_args()
    bad = 0
    for eps in a.epsilon:
        t = time.perf_counter()
        rep = sweep_geodesic_ratio(eps, a.threads)
        bad += rep.violations
        d1, d2, dt = rep.argmax_params
        print(f"eps={eps:<7g} cells={rep.cells:>12,d}  max ratio={rep.max_ratio!r}"
              f" at (d1={d1:.4f}, d2={d2:.4f}, dtheta={dt:.4f})  violations={rep.violations}"
              f"  [{time.perf_counter() - t:.1f}s]")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
