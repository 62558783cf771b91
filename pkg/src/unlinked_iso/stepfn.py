"""Nondecreasing right-continuous step functions.

One type covers the fitted regression function, empirical CDFs and their
pushforwards. A function is constant between knots and flat beyond the
extreme knots, except that CDF-like functions carry an explicit value to
the left of the first knot (``left``, 0 for an empirical CDF).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousFitError, ConfigError, DivergenceError, EmptyInputError, MonotonicityError, ShapeError
from .io import write_csv_columns


@dataclass(frozen=True, eq=False)
class StepFunction:
    knots: np.ndarray
    values: np.ndarray
    domain: tuple[float, float]
    left: float | None = None

    def __post_init__(self):
        knots = np.array(self.knots, dtype=float).ravel()
        values = np.array(self.values, dtype=float).ravel()
        if knots.size == 0 or knots.size != values.size:
            raise ShapeError(f"need one value per knot (got {knots.size} knots, {values.size} values)")
        if np.any(np.diff(knots) <= 0):
            raise ShapeError("knots must be strictly increasing")
        if np.any(np.diff(values) < 0):
            raise MonotonicityError("step function values must be nondecreasing")
        if self.left is not None and self.left > values[0]:
            raise MonotonicityError("left value exceeds the first step")
        lo, hi = float(self.domain[0]), float(self.domain[1])
        if not (lo <= knots[0] and knots[-1] <= hi):
            raise ShapeError(f"knots [{knots[0]}, {knots[-1]}] fall outside domain [{lo}, {hi}]")
        knots.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "domain", (lo, hi))

    def __call__(self, x):
        return evaluate(self, x)

    @property
    def left_value(self):
        return self.values[0] if self.left is None else self.left

    def to_dict(self):
        lo, hi = self.domain
        d = {
            "knots": self.knots.tolist(),
            "values": self.values.tolist(),
            "domain": [lo if np.isfinite(lo) else None, hi if np.isfinite(hi) else None],
        }
        if self.left is not None:
            d["left"] = self.left
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            lo, hi = d["domain"]
            lo = -np.inf if lo is None else float(lo)
            hi = np.inf if hi is None else float(hi)
            return cls(np.asarray(d["knots"], dtype=float), np.asarray(d["values"], dtype=float),
                       (lo, hi), d.get("left"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ShapeError(f"malformed step function record: {exc}") from exc

    def grid(self, points=512):
        """Sample on a uniform grid over the domain (finite domains only)."""
        lo, hi = self.domain
        if not (np.isfinite(lo) and np.isfinite(hi)):
            lo, hi = self.knots[0], self.knots[-1]
        xs = np.linspace(lo, hi, int(points))
        return xs, evaluate(self, xs)

    def write_grid_csv(self, path, points=512):
        xs, ys = self.grid(points)
        write_csv_columns(path, {"x": xs, "y": ys})


def evaluate(f, x):
    """Right-continuous evaluation with flat extension past the extreme knots."""
    x = np.asarray(x, dtype=float)
    idx = np.searchsorted(f.knots, x, side="right") - 1
    out = f.values[np.clip(idx, 0, None)]
    if f.left is not None:
        out = np.where(idx < 0, f.left, out)
    return out if out.ndim else float(out)


def from_fitted(sorted_xs, theta, domain=None):
    """Step function taking ``theta[i]`` on ``[x_(i), x_(i+1))``.

    Repeated x values with equal fitted values collapse to one knot; repeated
    x values with different fitted values are rejected.
    """
    xs = np.asarray(sorted_xs, dtype=float).ravel()
    theta = np.asarray(theta, dtype=float).ravel()
    if xs.size == 0:
        raise EmptyInputError("no covariates")
    if xs.size != theta.size:
        raise ShapeError(f"{xs.size} covariates but {theta.size} fitted values")
    if np.any(np.diff(xs) < 0):
        raise ShapeError("covariates must be sorted ascending")
    if np.any(np.diff(theta) < 0):
        raise MonotonicityError("fitted values must be nondecreasing along sorted covariates")
    dup = np.diff(xs) == 0
    if np.any(dup & (np.diff(theta) != 0)):
        raise AmbiguousFitError("a repeated covariate carries two different fitted values")
    keep = np.concatenate([[True], ~dup])
    if domain is None:
        domain = (xs[0], xs[-1])
    lo, hi = float(domain[0]), float(domain[1])
    if lo > hi:
        raise ConfigError(f"empty domain [{lo}, {hi}]")
    return StepFunction(xs[keep], theta[keep], (lo, hi))


def generalized_inverse(f, y):
    """``inf{x in domain : f(x) >= y}``, or the domain's upper end if no x qualifies."""
    y = np.asarray(y, dtype=float)
    lo, hi = f.domain
    # first knot whose value reaches y; values are sorted so searchsorted applies
    idx = np.searchsorted(f.values, y, side="left")
    out = np.where(idx < f.values.size, f.knots[np.minimum(idx, f.values.size - 1)], hi)
    out = np.where(f.left_value >= y, lo, out)
    return out if out.ndim else float(out)


def ecdf(sample):
    """Right-continuous empirical CDF (0 left of the smallest atom)."""
    s = np.asarray(sample, dtype=float).ravel()
    if s.size == 0:
        raise EmptyInputError("empirical CDF of an empty sample")
    atoms, counts = np.unique(s, return_counts=True)
    values = np.cumsum(counts) / s.size
    values[-1] = 1.0
    return StepFunction(atoms, values, (-np.inf, np.inf), left=0.0)


def pushforward_ecdf(m, xs):
    """Empirical CDF of the fitted values ``m(x_i)``."""
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size == 0:
        raise EmptyInputError("pushforward of an empty covariate sample")
    return ecdf(evaluate(m, xs))


def l2_distance_sq(f, g, window=(-np.inf, np.inf)):
    """Exact integral of ``(f - g)^2`` over ``window``.

    The integrand is constant on the merged knot partition, so the integral
    is a finite sum. Infinite windows are allowed only when the tails agree.
    """
    a, b = float(window[0]), float(window[1])
    if a > b:
        raise ConfigError(f"empty window [{a}, {b}]")
    knots = np.union1d(f.knots, g.knots)
    if not np.isfinite(a):
        if f.left_value != g.left_value:
            raise DivergenceError("left tails differ; integral over an infinite window diverges")
        a = min(knots[0], b) if np.isfinite(b) else knots[0]
    if not np.isfinite(b):
        if f.values[-1] != g.values[-1]:
            raise DivergenceError("right tails differ; integral over an infinite window diverges")
        b = max(knots[-1], a)
    inner = knots[(knots > a) & (knots < b)]
    edges = np.concatenate([[a], inner, [b]])
    left_pts = edges[:-1]
    diff = np.asarray(evaluate(f, left_pts)) - np.asarray(evaluate(g, left_pts))
    return float(np.sum(diff * diff * np.diff(edges)))
