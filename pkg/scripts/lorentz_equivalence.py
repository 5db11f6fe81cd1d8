"""Lorentz-force orbits against horizontal geodesics of the 5-d bundle form."""

import argparse

from pfaffgeom.curves import IntegratorSettings
from pfaffgeom.em import (
    FourPotentialSpec,
    constrained_geodesic_em,
    cyclotron_radius,
    four_velocity,
    lorentz_integrate,
    orbit_radius,
    trajectory_compare,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--speed", type=float, nargs="+", default=[0.01, 0.1, 0.5, 0.9])
    ap.add_argument("--B", type=float, default=1.0)
    ap.add_argument("--step", type=float, default=1e-3)
    ap.add_argument("--steps", type=int, default=10_000)
    args = ap.parse_args()

    pot = FourPotentialSpec("uniform_B", {"B": args.B})
    st = IntegratorSettings(args.step, args.steps)
    print(f"{'speed':>6} {'deviation':>11} {'radius':>12} {'expected':>12} {'rel.err':>9}")
    for v in args.speed:
        v0 = four_velocity(v)
        lor = lorentz_integrate(pot, [0, 0, 0, 0], v0, st)
        geo = constrained_geodesic_em(pot, [0, 0, 0, 0], v0, st)
        dev = trajectory_compare(lor, geo)["max_pointwise_distance"]
        r, r0 = orbit_radius(lor), cyclotron_radius(pot, v)
        print(f"{v:6.3f} {dev:11.3e} {r:12.8f} {r0:12.8f} {abs(r - r0) / r0:9.2e}")


if __name__ == "__main__":
    main()
