"""MSE of the minimum-contrast fit at n = 1000 (slow: about a second per fit).

    python scripts/mse_table_large.py --reps 50 --m0 const --noise gauss
"""

import argparse

from unlinked_iso import simlab


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m0", default="all")
    p.add_argument("--noise", default="both", choices=["laplace", "gauss", "both"])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=2025)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default="mse_n1000.csv")
    args = p.parse_args()

    names = list(simlab.M0_FUNCTIONS) if args.m0 == "all" else [args.m0]
    noises = ["laplace", "gauss"] if args.noise == "both" else [args.noise]
    scenarios = [
        simlab.Scenario(m0, simlab.unit_sd_noise(k), n_x=args.n, reps=args.reps, seed=args.seed)
        for k in noises
        for m0 in names
    ]
    reports = simlab.run_table(scenarios, ("ulbdd",), threads=args.threads)
    simlab.write_table(reports, args.out)
    for r in reports:
        print(f"{r.scenario:24s} {r.mean_mse:7.4f} +/- {r.mc_stderr:.4f} (failures={r.failures})")


if __name__ == "__main__":
    main()
