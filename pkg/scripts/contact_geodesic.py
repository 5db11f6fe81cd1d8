"""Compare a constrained geodesic of the contact form with the normality test.

Prints constraint drift, the rotation residual |i_v varpi| along the path,
and the range of the Lagrange multiplier, with and without velocity projection.
"""

import argparse

import numpy as np

from pfaffgeom.curves import IntegratorSettings, integrate, normality_check
from pfaffgeom.forms import CovectorFieldSpec, MetricSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step", type=float, default=1e-3)
    ap.add_argument("--steps", type=int, default=10_000)
    ap.add_argument("--x0", type=float, nargs=3, default=[0.3, 0.5, 0.0])
    ap.add_argument("--v0", type=float, nargs=3, default=[1.0, 0.7, 0.5])
    args = ap.parse_args()

    spec = CovectorFieldSpec.catalog("contact")
    e3 = MetricSpec.preset("euclidean", 3)
    for proj in (False, True):
        st = IntegratorSettings(args.step, args.steps, velocity_projection=proj)
        tr = integrate(spec, e3, "geodesic", {"x": args.x0, "v": args.v0}, st)
        nc = normality_check(spec, e3, tr)
        print(f"projection={proj!s:5}  max drift={tr.drift.max():.3e}  "
              f"max |i_v varpi|={nc.residual.max():.4f}  "
              f"lambda in [{tr.lam.min():+.4f}, {tr.lam.max():+.4f}]  "
              f"end={np.array2string(tr.x[-1], precision=5)}")


if __name__ == "__main__":
    main()
