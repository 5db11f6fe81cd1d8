"""Endpoint error of RK4 along a great half-circle, for a ladder of step counts."""

import argparse

from pfaffgeom.acceptance import sphere_endpoint_error


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, nargs="+", default=[25, 50, 100, 200, 400])
    args = ap.parse_args()
    prev = None
    print(f"{'steps':>6} {'error':>12} {'ratio':>8}")
    for n in args.steps:
        err = sphere_endpoint_error(n)
        ratio = f"{prev / err:8.2f}" if prev else " " * 8
        print(f"{n:>6} {err:12.4e} {ratio}")
        prev = err


if __name__ == "__main__":
    main()
