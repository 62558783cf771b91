"""Synthetic scenarios and the Monte Carlo MSE harness.

Replication ``r`` of a scenario with seed ``s`` draws everything from
``SeedSequence([s, r])``, so a table is bit-identical whatever the number of
worker processes.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .baselines import cs_estimator, pava, quantile_match
from .errors import ConfigError, UnlinkedIsoError
from .fit import FitConfig, fit
from .io import dump_json, write_csv_columns
from .noise import EMPIRICAL, GAUSSIAN, LAPLACE, NoiseModel

log = logging.getLogger(__name__)

THREADS_ENV = "UNLINKED_ISO_THREADS"

# grouping tolerance (in noise sd) used for the tables; see README
TABLE_EPS_FACTOR = 0.1


def _lin(x):
    return np.asarray(x, dtype=float).copy()


def _const(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _step2(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 5.0, 2.0, 8.0)


def _step3(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 10.0 / 3.0, 0.0, np.where(x < 20.0 / 3.0, 5.0, 10.0))


def _power(x):
    # odd quartic centred at the middle of [0, 10]
    u = np.asarray(x, dtype=float) - 5.0
    return np.sign(u) * u**4 / 120.0


M0_FUNCTIONS: dict[str, Callable] = {
    "lin": _lin,
    "const": _const,
    "step2": _step2,
    "step3": _step3,
    "power": _power,
}

ESTIMATORS = ("ulbdd", "ulcs", "ulquant", "lmono")


def gen_m0(name):
    try:
        return M0_FUNCTIONS[name]
    except KeyError:
        raise ConfigError(f"unknown regression function {name!r}; choose from {', '.join(M0_FUNCTIONS)}") from None


def unit_sd_noise(kind):
    """Laplace or Gaussian noise with standard deviation 1."""
    if kind in ("laplace", LAPLACE):
        return NoiseModel.laplace(1.0 / np.sqrt(2.0))
    if kind in ("gauss", "gaussian", GAUSSIAN):
        return NoiseModel.gaussian(1.0)
    raise ConfigError(f"unknown noise {kind!r}; choose laplace or gauss")


@dataclass(frozen=True, eq=False)
class Scenario:
    """One synthetic setting.

    ``draw="shuffle"`` generates linked pairs and permutes the responses
    (requires ``n_y == n_x``); ``draw="independent"`` draws the responses
    from a fresh covariate sample. ``"auto"`` picks shuffle when the sizes
    agree.
    """

    m0: str
    noise: NoiseModel
    n_x: int = 100
    n_y: int | None = None
    support: tuple[float, float] = (0.0, 10.0)
    reps: int = 1
    seed: int = 0
    draw: str = "auto"

    def __post_init__(self):
        gen_m0(self.m0)
        if self.n_y is None:
            object.__setattr__(self, "n_y", self.n_x)
        if self.n_x < 2 or self.n_y < 2:
            raise ConfigError("sample sizes must be at least 2")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        lo, hi = self.support
        if not lo < hi:
            raise ConfigError("support must be a nondegenerate interval")
        if self.draw not in ("auto", "shuffle", "independent"):
            raise ConfigError(f"unknown draw mode {self.draw!r}")
        if self.draw == "shuffle" and self.n_x != self.n_y:
            raise ConfigError("shuffled draws need n_x == n_y")

    @property
    def truth(self):
        return gen_m0(self.m0)

    @property
    def draw_mode(self):
        if self.draw == "auto":
            return "shuffle" if self.n_x == self.n_y else "independent"
        return self.draw

    @property
    def label(self):
        name = {LAPLACE: "laplace", GAUSSIAN: "gauss", EMPIRICAL: "empirical"}[self.noise.kind]
        size = f"n={self.n_x}" if self.n_x == self.n_y else f"nx={self.n_x},ny={self.n_y}"
        return f"{self.m0}/{name}/{size}"


class Dataset(NamedTuple):
    xs: np.ndarray
    ys: np.ndarray
    truth: Callable
    linked_xs: np.ndarray
    linked_ys: np.ndarray


def sample_noise(noise, size, rng):
    if noise.kind == LAPLACE:
        return rng.laplace(0.0, noise.scale, size)
    if noise.kind == GAUSSIAN:
        return rng.normal(0.0, noise.scale, size)
    return rng.choice(noise.residuals, size=size, replace=True)


def simulate_dataset(s, rng):
    """Draw unlinked ``(xs, ys)`` plus a linked sample for the oracle."""
    m0 = s.truth
    lo, hi = s.support
    xs = rng.uniform(lo, hi, s.n_x)
    if s.draw_mode == "shuffle":
        linked_ys = m0(xs) + sample_noise(s.noise, s.n_x, rng)
        ys = rng.permutation(linked_ys)
        return Dataset(xs, ys, m0, xs, linked_ys)
    x_resp = rng.uniform(lo, hi, s.n_y)
    ys = m0(x_resp) + sample_noise(s.noise, s.n_y, rng)
    linked_ys = m0(xs) + sample_noise(s.noise, s.n_x, rng)
    return Dataset(xs, ys, m0, xs, linked_ys)


def rng_for(seed, rep):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(rep)]))


def mse(estimate, truth, xs):
    """Average squared error of ``estimate`` against ``truth`` at ``xs``."""
    xs = np.asarray(xs, dtype=float)
    err = np.asarray(estimate(xs), dtype=float) - np.asarray(truth(xs), dtype=float)
    return float(np.mean(err * err))


def table_fit_config(s):
    """Configuration used for the UL BDD column: K = 20 n iterations."""
    return FitConfig(max_iters=20 * s.n_x, eps=TABLE_EPS_FACTOR * s.noise.std())


def run_estimator(name, data, s, fit_config=None):
    """Fit one named estimator; returns ``(estimate, evaluation_xs)``."""
    if name == "ulbdd":
        cfg = fit_config if fit_config is not None else table_fit_config(s)
        return fit(data.xs, data.ys, s.noise, cfg).fitted, data.xs
    if name == "ulcs":
        return cs_estimator(data.xs, data.ys, s.noise), data.xs
    if name == "ulquant":
        return quantile_match(data.xs, data.ys), data.xs
    if name == "lmono":
        return pava(data.linked_xs, data.linked_ys), data.linked_xs
    raise ConfigError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}")


@dataclass(frozen=True)
class MseReport:
    scenario: str
    estimator: str
    mean_mse: float
    mc_stderr: float
    reps: int
    failures: int = 0
    values: tuple[float, ...] = field(default=(), repr=False)

    def row(self):
        return {
            "scenario": self.scenario,
            "estimator": self.estimator,
            "mean_mse": self.mean_mse,
            "mc_stderr": self.mc_stderr,
            "reps": self.reps,
            "failures": self.failures,
        }


def _one_rep(task):
    s, rep, estimators, fit_config = task
    data = simulate_dataset(s, rng_for(s.seed, rep))
    out = {}
    for name in estimators:
        try:
            est, at = run_estimator(name, data, s, fit_config)
            out[name] = mse(est, data.truth, at)
        except (UnlinkedIsoError, ArithmeticError, ValueError) as exc:
            log.warning("%s failed on %s rep %d: %s", name, s.label, rep, exc)
            out[name] = None
    return out


def resolve_threads(threads=None):
    """Worker count: explicit argument, capped by $UNLINKED_ISO_THREADS."""
    cap = os.environ.get(THREADS_ENV)
    n = threads if threads is not None else (int(cap) if cap else 1)
    if cap:
        n = min(n, int(cap))
    return max(1, int(n))


def _map(func, tasks, threads):
    if threads <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        # map preserves task order, so aggregation does not depend on scheduling
        return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


def _summarise(label, name, values):
    ok = np.array([v for v in values if v is not None], dtype=float)
    failures = len(values) - ok.size
    if ok.size == 0:
        return MseReport(label, name, float("nan"), float("nan"), 0, failures)
    se = float(ok.std(ddof=1) / np.sqrt(ok.size)) if ok.size > 1 else 0.0
    return MseReport(label, name, float(ok.mean()), se, int(ok.size), failures, tuple(ok.tolist()))


def run_table(scenarios, estimators=ESTIMATORS, threads=None, fit_config=None):
    """Monte Carlo mean MSE (and its standard error) per scenario and estimator.

    A replication in which an estimator raises is counted in ``failures``
    and left out of the mean.
    """
    estimators = tuple(estimators)
    for name in estimators:
        if name not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}")
    tasks = [(s, rep, estimators, fit_config) for s in scenarios for rep in range(s.reps)]
    results = _map(_one_rep, tasks, resolve_threads(threads))
    reports = []
    pos = 0
    for s in scenarios:
        chunk = results[pos:pos + s.reps]
        pos += s.reps
        for name in estimators:
            reports.append(_summarise(s.label, name, [r[name] for r in chunk]))
    return reports


def write_table(reports, path, fmt="csv"):
    rows = [r.row() for r in reports]
    if fmt == "json":
        dump_json(rows, path)
        return
    cols = {k: [row[k] for row in rows] for k in ("scenario", "estimator", "mean_mse", "mc_stderr", "reps", "failures")}
    write_csv_columns(path, cols)


def windowed_l1(estimate, truth, xs, window):
    """``n^-1 sum_{x_i in [a, b]} |estimate(x_i) - truth(x_i)|``."""
    xs = np.asarray(xs, dtype=float)
    a, b = window
    inside = (xs >= a) & (xs <= b)
    err = np.abs(np.asarray(estimate(xs)) - np.asarray(truth(xs)))
    return float(np.sum(err[inside]) / xs.size)


def _rate_rep(task):
    s, rep, window, fit_config = task
    data = simulate_dataset(s, rng_for(s.seed, rep))
    cfg = fit_config if fit_config is not None else FitConfig(max_iters=20 * s.n_x)
    est = fit(data.xs, data.ys, s.noise, cfg).fitted
    return windowed_l1(est, data.truth, data.xs, window)


def rate_scan(base, ns, window, reps=None, threads=None, fit_config_for=None):
    """Median windowed L1 error of the minimum-contrast fit for each sample size.

    ``window`` must lie strictly inside the support. ``fit_config_for(n)``
    overrides the default ``FitConfig(max_iters=20 n)``.
    """
    ns = [int(n) for n in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("sample sizes must be strictly increasing")
    a, b = window
    lo, hi = base.support
    if not (lo < a <= b < hi):
        raise ConfigError(f"window [{a}, {b}] must lie strictly inside the support [{lo}, {hi}]")
    reps = base.reps if reps is None else int(reps)
    threads = resolve_threads(threads)
    out = []
    for n in ns:
        s = replace(base, n_x=n, n_y=n, reps=reps)
        cfg = fit_config_for(n) if fit_config_for is not None else None
        errs = _map(_rate_rep, [(s, r, (a, b), cfg) for r in range(reps)], threads)
        out.append((n, float(np.median(errs))))
    return out
