"""Grouped gradient descent for the minimum-contrast monotone estimator.

The criterion depends on the fitted function only through its values at the
covariates, and those values can be fitted without an order constraint and
sorted afterwards. Entries that sit within ``eps`` of each other are merged
into one group which shares a single gradient step, so the per-iteration
cost scales with the number of distinct levels rather than with ``n``.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, EmptyInputError, MonotonicityError, NumericFailure, ShapeError
from .noise import EMPIRICAL, NoiseModel
from .objective import GroupedLevels, QuadratureConfig, level_scores, objective, stationarity_scores
from .stepfn import StepFunction, from_fitted

log = logging.getLogger(__name__)

EPS_FLOOR = 1e-8
# relative slack before a monitored objective value counts as "worse than the best so far"
_STALL_RTOL = 1e-6
_STALL_CHECKS = 3


@dataclass(frozen=True)
class FitConfig:
    """Hyperparameters of the grouped descent.

    ``eps=None`` uses :func:`default_eps`; ``eta=None`` uses ``0.5 * n_x``,
    which makes a step move each level by about its stationarity residual.
    ``init`` is ``"sorted"`` (sorted responses) or a nondecreasing vector of
    length ``n_x``.
    """

    eps: float | None = None
    eta: float | None = None
    max_iters: int = 2000
    steps_per_group: int = 1
    stop_tol: float = 0.0
    init: object = "sorted"
    monitor_every: int = 0
    domain: tuple[float, float] | None = None

    def __post_init__(self):
        if self.eps is not None and not self.eps > 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if int(self.max_iters) < 1:
            raise ConfigError(f"max_iters must be at least 1, got {self.max_iters}")
        if int(self.steps_per_group) < 1:
            raise ConfigError("steps_per_group must be at least 1")
        if self.stop_tol < 0:
            raise ConfigError("stop_tol must be nonnegative")
        if self.monitor_every < 0:
            raise ConfigError("monitor_every must be nonnegative")
        if self.stop_tol > 0 and self.monitor_every == 0:
            raise ConfigError("stop_tol needs monitor_every > 0 (the rule compares monitored objectives)")
        if isinstance(self.init, str):
            if self.init != "sorted":
                raise ConfigError(f"unknown init {self.init!r}; use 'sorted' or a vector")
        else:
            init = np.asarray(self.init, dtype=float)
            if init.ndim != 1 or init.size == 0:
                raise ConfigError("init vector must be 1-d and nonempty")
            object.__setattr__(self, "init", tuple(init.tolist()))

    @classmethod
    def simulation_defaults(cls, n, **kw):
        """K = 20 n iterations, everything else default."""
        return cls(max_iters=20 * int(n), **kw)

    def to_dict(self):
        d = asdict(self)
        if not isinstance(self.init, str):
            d["init"] = list(self.init)
        return d


@dataclass(frozen=True, eq=False)
class FitResult:
    fitted: StepFunction
    levels: GroupedLevels
    objective_trace: tuple[float, ...]
    iterations_run: int
    max_fenchel_residual: float
    config_echo: FitConfig
    eps_used: float = 0.0
    eta_used: float = 0.0
    stalled: bool = False

    def fitted_values(self, xs):
        return self.fitted(np.asarray(xs, dtype=float))

    def to_dict(self):
        d = self.fitted.to_dict()
        d.update(
            iterations=self.iterations_run,
            fenchel_residual=self.max_fenchel_residual,
            objective_trace=list(self.objective_trace),
            levels=self.levels.levels.tolist(),
            counts=self.levels.counts.tolist(),
            eps=self.eps_used,
            eta=self.eta_used,
            stalled=self.stalled,
        )
        return d


def default_eps(ys, noise_scale):
    """Grouping tolerance ``(Y_(n) - Y_(1)) / (n^(1/3) sigma)``, floored at 1e-8."""
    ys = np.asarray(ys, dtype=float).ravel()
    if ys.size < 2:
        raise ConfigError("default eps needs at least two responses")
    if not noise_scale > 0:
        raise ConfigError("noise scale must be positive")
    eps = (ys.max() - ys.min()) / (np.cbrt(ys.size) * noise_scale)
    return float(max(eps, EPS_FLOOR))


def merge_pass(m, counts, eps):
    """One left-to-right grouping sweep.

    A group starts at ``begidx`` and absorbs each following entry while
    ``m[j] - m[begidx] <= eps``; the merged value is the count-weighted mean.
    Singletons pass through untouched (bit for bit).
    """
    vals = m.tolist()
    cnts = counts.tolist()
    out_m, out_c = [], []
    n = len(vals)
    beg = 0
    for j in range(1, n + 1):
        if j == n or vals[j] - vals[beg] > eps:
            if j - beg == 1:
                out_m.append(vals[beg])
                out_c.append(cnts[beg])
            else:
                c = cnts[beg:j]
                total = sum(c)
                out_m.append(sum(v * k for v, k in zip(vals[beg:j], c)) / total)
                out_c.append(total)
            beg = j
    return np.asarray(out_m), np.asarray(out_c, dtype=np.int64)


def merge_groups(m, counts, eps):
    """Repeat :func:`merge_pass` until adjacent levels are more than ``eps`` apart."""
    while True:
        new_m, new_c = merge_pass(m, counts, eps)
        if new_m.size == m.size:
            return new_m, new_c
        m, counts = new_m, new_c


def initial_levels(ys, n_x, init="sorted"):
    ys = np.asarray(ys, dtype=float)
    if isinstance(init, str):
        if ys.size == n_x:
            return np.sort(ys)
        # unequal sizes: response quantiles at the covariate plotting positions
        return np.quantile(ys, (np.arange(n_x) + 0.5) / n_x)
    m0 = np.asarray(init, dtype=float)
    if m0.size != n_x:
        raise ShapeError(f"init vector has length {m0.size}, expected n_x={n_x}")
    if np.any(np.diff(m0) < 0):
        raise MonotonicityError("init vector must be nondecreasing")
    return m0.copy()


def _prepare(xs, ys, noise):
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.size == 0 or ys.size == 0:
        raise EmptyInputError("fit needs nonempty covariate and response samples")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ConfigError("samples contain non-finite values")
    if not isinstance(noise, NoiseModel):
        raise ConfigError("noise must be a NoiseModel")
    return xs, ys


def _grouped(m, counts):
    order = np.argsort(m, kind="stable")
    vals, inv = np.unique(m[order], return_inverse=True)
    return GroupedLevels(vals, np.bincount(inv, weights=counts[order]).astype(np.int64))


def _descend(xs, ys, noise, config, quad, trace_check):
    n_x, n_y = xs.size, ys.size
    eps = config.eps if config.eps is not None else default_eps(ys, noise.std())
    eta = config.eta if config.eta is not None else 0.5 * n_x
    m = initial_levels(ys, n_x, config.init)
    counts = np.ones(n_x, dtype=np.int64)
    ys_sorted = np.sort(ys)
    b0 = float(noise.bee(0.0)) if noise.kind == EMPIRICAL else None
    monitor = config.monitor_every
    if trace_check and monitor == 0:
        monitor = max(1, config.max_iters // 50)
    quad = quad or QuadratureConfig()

    trace = []
    best = np.inf
    bad_checks = 0
    stalled = False
    it = 0
    for it in range(1, int(config.max_iters) + 1):
        m, counts = merge_groups(m, counts, eps)
        for _ in range(config.steps_per_group):
            grad = (2.0 / n_x) * level_scores(m, counts, ys_sorted, noise, n_y, b0)
            if not np.all(np.isfinite(grad)):
                raise NumericFailure(f"non-finite gradient at iteration {it}")
            m = m - eta * grad
        if not np.all(np.isfinite(m)):
            raise NumericFailure(f"non-finite level at iteration {it}")
        if monitor and it % monitor == 0:
            val = objective(_grouped(m, counts), ys_sorted, noise, quad)
            if not np.isfinite(val):
                raise NumericFailure(f"non-finite objective at iteration {it}")
            prev = trace[-1] if trace else None
            trace.append(val)
            if trace_check:
                if val > best * (1 + _STALL_RTOL) + 1e-15:
                    bad_checks += 1
                    if bad_checks >= _STALL_CHECKS:
                        stalled = True
                        log.warning("objective failed to decrease for %d checks (iteration %d)",
                                    bad_checks, it)
                        break
                else:
                    bad_checks = 0
                best = min(best, val)
            if config.stop_tol > 0 and prev is not None and prev - val < config.stop_tol:
                break
    return m, counts, trace, it, eps, eta, stalled


def _reconstruct(xs, ys, noise, config, m, counts, trace, it, eps, eta, stalled):
    theta = np.sort(np.repeat(m, counts))
    order = np.argsort(xs, kind="stable")
    sx = xs[order]
    ux, inv = np.unique(sx, return_inverse=True)
    if ux.size < sx.size:
        # a function takes one value per point: pool fitted values over tied covariates
        theta = (np.bincount(inv, weights=theta) / np.bincount(inv))[inv]
    fitted = from_fitted(sx, theta, config.domain)
    levels = GroupedLevels.from_values(theta)
    resid = float(np.max(np.abs(stationarity_scores(levels, ys, noise))))
    return FitResult(fitted, levels, tuple(trace), it, resid, config, eps, eta, stalled)


def fit(xs, ys, noise, config=None, quad=None):
    """Fit a nondecreasing step function from unlinked ``xs`` and ``ys``.

    Sample sizes may differ. Runs exactly ``max_iters`` iterations unless a
    positive ``stop_tol`` is set. Raises :class:`NumericFailure` on a
    non-finite gradient.
    """
    xs, ys = _prepare(xs, ys, noise)
    config = config or FitConfig()
    state = _descend(xs, ys, noise, config, quad, trace_check=False)
    return _reconstruct(xs, ys, noise, config, *state)


def fit_with_trace_check(xs, ys, noise, config=None, quad=None):
    """:func:`fit` with objective monitoring and a stall diagnostic.

    The objective is evaluated every ``monitor_every`` iterations (1/50 of the
    run if unset). If it sits materially above the best value seen for three
    consecutive checks the run halts and the result carries ``stalled=True``.
    """
    xs, ys = _prepare(xs, ys, noise)
    config = config or FitConfig()
    state = _descend(xs, ys, noise, config, quad, trace_check=True)
    return _reconstruct(xs, ys, noise, config, *state)
