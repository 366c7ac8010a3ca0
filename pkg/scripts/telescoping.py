"""Dirac cocycle on one leaf: partial sums approach the single-leaf kernel and the
truncated shear approaches the elementary earthquake as the depth grows."""
import argparse

from liouville.cocycle import make_dirac
from liouville.earthquake import elementary, sup_angle_distance, truncated_shear
from liouville.farey import FareyLamination
from liouville.functions import bump
from liouville.quadrature import QuadratureSpec, kernel_geodesic
from liouville.series import tangent_series_value


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--leaf", type=int, nargs=2, default=[0, 1], metavar=("A", "B"))
    ap.add_argument("--n", type=float, default=10)
    ap.add_argument("--t", type=float, default=0.1)
    args = ap.parse_args()
    lam, q, phi = FareyLamination(), QuadratureSpec(), bump()
    g = lam.leaf(*args.leaf)
    c = make_dirac(g)
    kg = kernel_geodesic(phi, g.geodesic, q)
    rep = tangent_series_value(phi, c, args.n, q, lam, tail=False)
    print(f"kernel_geodesic = {kg:+.6e}")
    for n, s in rep.partial_sums:
        sup = sup_angle_distance(truncated_shear(c, lam.spanning_family(n), scale=args.t),
                                 elementary(g, args.t))
        print(f"n={n:g}  S_n={s:+.6e}  rel gap={abs(s - kg) / abs(kg):.2e}  "
              f"shear sup={sup:.2e}")


if __name__ == "__main__":
    main()
