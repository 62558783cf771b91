"""Command-line interface: ``unlinked-iso <command> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import simlab
from .baselines import cs_estimator, pava, quantile_match
from .errors import ConfigError, UnlinkedIsoError
from .fit import FitConfig, fit
from .io import dump_json, load_json, read_csv_columns, write_csv_columns
from .noise import NoiseModel, laplace_from_variance, longitudinal_residuals, read_pairs_csv, read_residuals_csv
from .objective import GroupedLevels, stationarity_scores
from .stepfn import StepFunction, ecdf, l2_distance_sq, pushforward_ecdf

log = logging.getLogger("unlinked_iso")


def _add_noise_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--laplace", type=float, metavar="LAMBDA", help="Laplace noise with scale LAMBDA")
    g.add_argument("--gauss", type=float, metavar="SIGMA", help="Gaussian noise with sd SIGMA")
    g.add_argument("--residuals", type=Path, metavar="CSV",
                   help="empirical noise from a residual sample (column 'eps')")
    g.add_argument("--laplace-from-residuals", type=Path, metavar="CSV",
                   help="Laplace noise with lambda = sqrt(var/2) of a residual sample")
    p.add_argument("--symmetrize", action="store_true",
                   help="augment an empirical residual sample with its negation")


def noise_from_args(args):
    if args.laplace is not None:
        return NoiseModel.laplace(args.laplace)
    if args.gauss is not None:
        return NoiseModel.gaussian(args.gauss)
    if args.residuals is not None:
        return NoiseModel.empirical(read_residuals_csv(args.residuals), symmetrize=args.symmetrize)
    if args.laplace_from_residuals is not None:
        eps = read_residuals_csv(args.laplace_from_residuals)
        return laplace_from_variance(np.var(eps))
    raise ConfigError("no noise model given: use one of --laplace, --gauss, --residuals, "
                      "--laplace-from-residuals")


def _read_xy(args):
    xs = read_csv_columns(args.x, ["x"])["x"]
    ys = read_csv_columns(args.y, ["y"])["y"]
    return xs, ys


def cmd_fit(args):
    xs, ys = _read_xy(args)
    noise = noise_from_args(args)
    cfg = FitConfig(
        eps=args.eps,
        eta=args.eta,
        max_iters=args.iters if args.iters is not None else 20 * xs.size,
        steps_per_group=args.steps_per_group,
        stop_tol=args.stop_tol,
        monitor_every=args.monitor_every,
        domain=tuple(args.domain) if args.domain else None,
    )
    res = fit(xs, ys, noise, cfg)
    record = res.to_dict()
    record["noise"] = noise.describe()
    dump_json(record, args.out)
    if args.grid:
        res.fitted.write_grid_csv(args.grid, args.grid_points)
    print(f"iterations: {res.iterations_run}")
    print(f"distinct levels: {res.levels.levels.size}")
    print(f"max fenchel residual: {res.max_fenchel_residual:.6g}")
    return 0


def cmd_residuals(args):
    pairs = read_pairs_csv(args.input)
    ystar, eps = longitudinal_residuals(pairs)
    write_csv_columns(args.ystar_out, {"y": ystar})
    write_csv_columns(args.eps_out, {"eps": eps})
    var = float(np.var(eps))
    if var > 0:
        print(f"laplace lambda: {laplace_from_variance(var).scale:.6g}")
    else:
        print("laplace lambda: 0")
        log.warning("residuals are all identical: degenerate noise, no Laplace scale can be fitted")
    print(f"pairs: {ystar.size}")
    return 0


def cmd_simulate(args):
    names = list(simlab.M0_FUNCTIONS) if args.m0 == "all" else [args.m0]
    noises = ["laplace", "gauss"] if args.noise == "both" else [args.noise]
    estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
    scenarios = []
    for noise_name in noises:
        base = simlab.unit_sd_noise(noise_name)
        noise = (NoiseModel.laplace(base.scale * args.sd) if base.kind == "laplace"
                 else NoiseModel.gaussian(args.sd))
        for name in names:
            scenarios.append(simlab.Scenario(name, noise, n_x=args.n, n_y=args.ny, reps=args.reps,
                                             seed=args.seed))
    reports = simlab.run_table(scenarios, estimators, threads=args.threads)
    if args.out:
        simlab.write_table(reports, args.out, args.format)
    for r in reports:
        print(f"{r.scenario:28s} {r.estimator:8s} {r.mean_mse:8.4f} +/- {r.mc_stderr:.4f} "
              f"(reps={r.reps}, failures={r.failures})")
    return 0


def cmd_generate(args):
    s = simlab.Scenario(args.m0, simlab.unit_sd_noise(args.noise), n_x=args.n, n_y=args.ny, seed=args.seed)
    data = simlab.simulate_dataset(s, simlab.rng_for(args.seed, 0))
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_csv_columns(outdir / "x.csv", {"x": data.xs})
    write_csv_columns(outdir / "y.csv", {"y": data.ys})
    write_csv_columns(outdir / "truth.csv", {"x": data.xs, "m0": data.truth(data.xs)})
    write_csv_columns(outdir / "linked.csv", {"x": data.linked_xs, "y": data.linked_ys})
    print(f"wrote {s.label} to {outdir}")
    return 0


def cmd_diagnose(args):
    noise = noise_from_args(args)
    record = load_json(args.fit)
    fitted = StepFunction.from_dict(record)
    xs, ys = _read_xy(args)
    levels = GroupedLevels.from_values(fitted(xs))
    scores = stationarity_scores(levels, ys, noise)
    out = {
        "levels": levels.levels.tolist(),
        "counts": levels.counts.tolist(),
        "fenchel_residuals": np.abs(scores).tolist(),
        "max_fenchel_residual": float(np.max(np.abs(scores))),
    }
    if args.truth:
        ref = read_csv_columns(args.truth, ["m0"])["m0"]
        out["pushforward_l2_sq"] = l2_distance_sq(pushforward_ecdf(fitted, xs), ecdf(ref))
    text = dump_json(out, args.out)
    if args.out is None:
        print(text)
    else:
        print(f"max fenchel residual: {out['max_fenchel_residual']:.6g}")
    return 0


def cmd_baseline(args):
    if args.method == "pava":
        if not args.linked:
            raise ConfigError("pava needs --linked CSV with columns x,y")
        cols = read_csv_columns(args.linked, ["x", "y"])
        est = pava(cols["x"], cols["y"])
        dump_json(est.to_dict(), args.out)
        return 0
    xs, ys = _read_xy(args)
    if args.method == "quantile":
        mq = quantile_match(xs, ys)
        mq.write_csv(args.out)
        return 0
    est = cs_estimator(xs, ys, noise_from_args(args))
    dump_json(est.to_dict(), args.out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="unlinked-iso", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit the minimum-contrast monotone estimator")
    f.add_argument("--x", type=Path, required=True, help="CSV with column 'x'")
    f.add_argument("--y", type=Path, required=True, help="CSV with column 'y'")
    _add_noise_args(f)
    f.add_argument("--eps", type=float, help="grouping tolerance (default: range / (n^(1/3) sd))")
    f.add_argument("--eta", type=float, help="step size (default: 0.5 n_x)")
    f.add_argument("--iters", type=int, help="iterations K (default: 20 n_x)")
    f.add_argument("--steps-per-group", type=int, default=1)
    f.add_argument("--stop-tol", type=float, default=0.0)
    f.add_argument("--monitor-every", type=int, default=0)
    f.add_argument("--domain", type=float, nargs=2, metavar=("LO", "HI"))
    f.add_argument("--out", type=Path, required=True, help="fitted step function JSON")
    f.add_argument("--grid", type=Path, help="also write an x,y grid CSV for plotting")
    f.add_argument("--grid-points", type=int, default=512)
    f.add_argument("--seed", type=int, default=0, help="accepted for uniformity; fitting is deterministic")
    f.set_defaults(func=cmd_fit)

    r = sub.add_parser("residuals", help="split longitudinal pairs into responses and residuals")
    r.add_argument("--input", type=Path, required=True, help="CSV with columns y1,y2")
    r.add_argument("--ystar-out", type=Path, required=True)
    r.add_argument("--eps-out", type=Path, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_residuals)

    s = sub.add_parser("simulate", help="Monte Carlo MSE table")
    s.add_argument("--m0", default="all", help=f"one of {', '.join(simlab.M0_FUNCTIONS)} or 'all'")
    s.add_argument("--noise", default="both", choices=["laplace", "gauss", "both"])
    s.add_argument("--sd", type=float, default=1.0, help="noise standard deviation")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--ny", type=int, default=None)
    s.add_argument("--reps", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--estimators", default=",".join(simlab.ESTIMATORS))
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--out", type=Path)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("generate", help="export one synthetic dataset as CSV files")
    g.add_argument("--m0", default="lin")
    g.add_argument("--noise", default="laplace", choices=["laplace", "gauss"])
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--ny", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--outdir", type=Path, required=True)
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("diagnose", help="stationarity residuals of a saved fit")
    d.add_argument("--fit", type=Path, required=True)
    d.add_argument("--x", type=Path, required=True)
    d.add_argument("--y", type=Path, required=True)
    _add_noise_args(d)
    d.add_argument("--truth", type=Path, help="CSV with column 'm0' (true values at the covariates)")
    d.add_argument("--out", type=Path)
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_diagnose)

    b = sub.add_parser("baseline", help="comparison estimators")
    b.add_argument("method", choices=["pava", "quantile", "cs"])
    b.add_argument("--x", type=Path)
    b.add_argument("--y", type=Path)
    b.add_argument("--linked", type=Path, help="CSV with columns x,y (pava only)")
    _add_noise_args(b)
    b.add_argument("--out", type=Path, required=True)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_baseline)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "baseline" and args.method != "pava" and not (args.x and args.y):
        parser.error("baseline quantile/cs need --x and --y")
    try:
        return args.func(args)
    except UnlinkedIsoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
