"""Median windowed L1 error of the minimum-contrast fit as n grows.

    python scripts/rate_scan.py --ns 100 400 1600 --reps 50
"""

import argparse

import numpy as np

from unlinked_iso import simlab


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m0", default="lin")
    p.add_argument("--noise", default="laplace", choices=["laplace", "gauss"])
    p.add_argument("--ns", type=int, nargs="+", default=[100, 400, 1600])
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--window", type=float, nargs=2, default=(1.0, 9.0))
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--threads", type=int, default=None)
    args = p.parse_args()

    base = simlab.Scenario(args.m0, simlab.unit_sd_noise(args.noise), reps=args.reps, seed=args.seed)
    scan = simlab.rate_scan(base, args.ns, tuple(args.window), threads=args.threads)
    for n, err in scan:
        print(f"n={n:6d}  median L1 {err:.4f}")
    if len(scan) > 1:
        # least-squares slope of log error against log n
        slope = np.polyfit(np.log([n for n, _ in scan]), np.log([e for _, e in scan]), 1)[0]
        print(f"empirical rate exponent {slope:.3f}")


if __name__ == "__main__":
    main()
