"""Boundary terms B_n of the truncated series for a ladder of depths, with the log-slope fit."""
import argparse

from liouville.cocycle import cocycle_from_spec
from liouville.farey import FareyLamination
from liouville.functions import test_function_from_spec
from liouville.quadrature import QuadratureSpec
from liouville.series import boundary_decay_slope, boundary_term


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--phi", default="bump")
    ap.add_argument("--cocycle", default="depth_decay:1,0.5")
    ap.add_argument("--ns", type=float, nargs="+", default=[4, 6, 8])
    args = ap.parse_args()
    lam, q = FareyLamination(), QuadratureSpec()
    phi = test_function_from_spec({"kind": args.phi})
    c = cocycle_from_spec(args.cocycle)
    terms = []
    for n in args.ns:
        b = boundary_term(phi, c, n, q, lam)
        terms.append((n, b))
        print(f"n={n:g}  B_n={b:+.6e}")
    print(f"log-slope {boundary_decay_slope(terms):.3f}  (reference -0.5 nu = {-0.5 * phi.nu:g})")


if __name__ == "__main__":
    main()
