"""Scan |C0(phi,T)| e^{(1+nu)D + |u|} / ||phi|| over the triangles of enumerate(R).

Writes one CSV per test function and prints the inner/outer shell maxima.
"""
import argparse
import csv
import os

from liouville.farey import FareyLamination
from liouville.functions import bump, holder_bump
from liouville.quadrature import QuadratureSpec
from liouville.series import decay_ratio, kernel_cache


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radius", type=float, default=8.0)
    ap.add_argument("--out", default="runs/decay_scan")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    lam, q = FareyLamination(), QuadratureSpec()
    V = lam.enumerate(args.radius)
    for phi in (holder_bump(0.5), bump()):
        cache = kernel_cache(phi, q)
        act = [T for T in V if cache.touches(T)]
        cache.fill(act)
        rows = [(T.D, abs(T.u), cache.triangle(T), decay_ratio(phi, T, cache.triangle(T)))
                for T in act]
        path = os.path.join(args.out, f"{phi.name}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["D", "abs_u", "C0", "ratio"])
            w.writerows(rows)
        half = args.radius / 2
        inner = max(r[3] for r in rows if r[0] < half)
        outer = max((r[3] for r in rows if r[0] >= half), default=0.0)
        print(f"{phi.name}: {len(act)} triangles, inner max {inner:.3g}, "
              f"outer max {outer:.3g}, ratio {outer / inner:.3f} -> {path}")


if __name__ == "__main__":
    main()
