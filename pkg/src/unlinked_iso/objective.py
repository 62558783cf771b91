"""Minimum-contrast criterion and its first-order conditions.

The criterion compares the empirical CDF of the responses with the model CDF
obtained by convolving the fitted levels with the noise:

    M(m) = integral (H_ny(y) - n_x^-1 sum_i Phi(y - m_i))^2 dy

Everything here works on :class:`GroupedLevels`, i.e. the distinct fitted
values with their multiplicities. Gradients are per *entry* (the derivative
with respect to one covariate's fitted value), which is the quantity shared
by every member of a group.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from .errors import AccuracyError, ConfigError, EmptyInputError, ShapeError
from .noise import EMPIRICAL, LAPLACE, NoiseModel


@dataclass(frozen=True, eq=False)
class GroupedLevels:
    """Distinct levels (strictly increasing) with positive integer counts."""

    levels: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        levels = np.array(self.levels, dtype=float).ravel()
        counts = np.array(self.counts).ravel()
        if levels.size == 0:
            raise EmptyInputError("no levels")
        if levels.size != counts.size:
            raise ShapeError("levels and counts differ in length")
        if not np.all(np.isfinite(levels)):
            raise ConfigError("levels must be finite")
        if np.any(np.diff(levels) <= 0):
            raise ConfigError("levels must be strictly increasing")
        if np.any(counts < 1) or np.any(counts != np.round(counts)):
            raise ConfigError("counts must be positive integers")
        levels.setflags(write=False)
        counts = counts.astype(np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_values(cls, values):
        """Group a vector of fitted values (any order) by exact equality."""
        levels, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
        return cls(levels, counts)

    @property
    def n(self):
        return int(self.counts.sum())

    def expand(self):
        """Full nondecreasing vector, each level repeated by its count."""
        return np.repeat(self.levels, self.counts)

    def shifted(self, c):
        return GroupedLevels(self.levels + c, self.counts)


@dataclass(frozen=True)
class QuadratureConfig:
    """Numerical integration settings for evaluating the criterion.

    The window is the data/level range padded by ``range_padding`` noise
    scales on each side, cut into ``points`` uniform cells (further split at
    every response and level) with Gauss-Legendre nodes in each piece.
    """

    range_padding: float = 12.0
    points: int = 4096
    tail_tolerance: float = 1e-8
    order: int = 8

    def __post_init__(self):
        if not self.range_padding > 0:
            raise ConfigError("range_padding must be positive")
        if self.points < 64:
            raise ConfigError("points must be at least 64")
        if not self.tail_tolerance > 0:
            raise ConfigError("tail_tolerance must be positive")
        if self.order < 2:
            raise ConfigError("quadrature order must be at least 2")


class ObjectiveValue(NamedTuple):
    value: float
    tail_bound: float
    window: tuple[float, float]


def mixture_cdf(levels, noise, y):
    """Model CDF of the responses: ``sum_k (count_k / n) Phi(y - level_k)``."""
    y = np.asarray(y, dtype=float)
    w = levels.counts / levels.n
    flat = y.reshape(-1)
    out = noise.cdf(flat[:, None] - levels.levels[None, :]) @ w
    return out.reshape(y.shape) if y.ndim else float(out[0])


def _as_sample(ys):
    ys = np.asarray(ys, dtype=float).ravel()
    if ys.size == 0:
        raise EmptyInputError("no responses")
    return ys


def _tail_integral(noise, z0):
    # bound on integral_{-inf}^{z0} Phi(z)^2 dz, z0 <= 0
    if noise.kind == LAPLACE:
        lam = noise.scale
        return lam * np.exp(2.0 * z0 / lam) / 8.0
    t = z0 / noise.scale
    # integral of Phi(z / sigma) itself, which dominates Phi^2
    return noise.scale * (t * ndtr(t) + np.exp(-0.5 * t * t) / np.sqrt(2.0 * np.pi))


def objective_terms(levels, ys, noise, quad=None):
    """Criterion value together with its analytic tail bound and window."""
    ys = _as_sample(ys)
    if noise.kind == EMPIRICAL:
        return _objective_empirical(levels, ys, noise)
    quad = quad or QuadratureConfig()
    lv = levels.levels
    pad = quad.range_padding * noise.scale
    lo = min(ys.min(), lv[0]) - pad
    hi = max(ys.max(), lv[-1]) + pad
    tail = _tail_integral(noise, lo - lv[0]) + _tail_integral(noise, lv[-1] - hi)
    if tail > quad.tail_tolerance:
        raise AccuracyError(
            f"quadrature tail bound {tail:.3g} exceeds tolerance {quad.tail_tolerance:.3g}; "
            "increase range_padding"
        )
    edges = np.union1d(np.linspace(lo, hi, quad.points + 1), np.concatenate([ys, lv]))
    nodes, weights = np.polynomial.legendre.leggauss(quad.order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    y = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    h_emp = np.searchsorted(np.sort(ys), y, side="right") / ys.size
    diff = h_emp - mixture_cdf(levels, noise, y)
    return ObjectiveValue(float(np.dot(w, diff * diff)), float(tail), (float(lo), float(hi)))


def _objective_empirical(levels, ys, noise):
    # both CDFs are step functions: integrate exactly on the merged partition
    res = noise.residuals
    model_knots = (levels.levels[:, None] + res[None, :]).ravel()
    edges = np.union1d(ys, model_knots)
    # midpoints, not left knots: level + residual - level can round below the residual
    mid = 0.5 * (edges[:-1] + edges[1:])
    h_emp = np.searchsorted(np.sort(ys), mid, side="right") / ys.size
    diff = h_emp - mixture_cdf(levels, noise, mid)
    value = float(np.sum(diff * diff * np.diff(edges)))
    return ObjectiveValue(value, 0.0, (float(edges[0]), float(edges[-1])))


def objective(levels, ys, noise, quad=None):
    """Integrated squared distance between the response ECDF and the model CDF."""
    return objective_terms(levels, ys, noise, quad).value


def stationarity_scores(levels, ys, noise, n_y=None):
    """Signed per-level residual of the first-order condition.

    ``1 - n_y^-1 sum_b Phi(Y_b - l_k) - n_x^-1 sum_a c_a B(l_k - l_a)``;
    zero at every distinct level of a stationary point.
    """
    ys = _as_sample(ys)
    return level_scores(levels.levels, levels.counts, ys, noise, n_y)


def level_scores(lv, counts, ys, noise, n_y=None, bee_at_zero=None):
    """Array form of :func:`stationarity_scores`.

    ``lv`` need not be sorted or distinct, which lets the optimizer call this
    on intermediate iterates.
    """
    n_y = ys.size if n_y is None else n_y
    n_x = counts.sum()
    if noise.kind == EMPIRICAL:
        res = noise.residuals
        hits = np.searchsorted(res, ys[None, :] - lv[:, None], side="right").sum(axis=1)
        fit_term = 1.0 - hits / (res.size * n_y)
        if bee_at_zero is None:
            bee_at_zero = float(noise.bee(0.0))
        coupling = counts * bee_at_zero
        p = lv.size
        if p > 1:
            # B_hat is costly, so skip the constant diagonal B_hat(0)
            i, j = np.nonzero(~np.eye(p, dtype=bool))
            b = noise.bee(lv[i] - lv[j])
            coupling = coupling + np.bincount(i, weights=b * counts[j], minlength=p)
    else:
        fit_term = 1.0 - noise.cdf(ys[None, :] - lv[:, None]).sum(axis=1) / n_y
        coupling = noise.bee(lv[:, None] - lv[None, :]) @ counts
    return fit_term - coupling / n_x


def gradient(levels, ys, noise, n_x=None, n_y=None):
    """Per-entry partial derivatives of the criterion, one per distinct level.

    ``dM/dm_i = (2/n_x) [1 - n_y^-1 sum_b Phi(Y_b - m_i)] - (2/n_x^2) sum_a c_a B(m_i - m_a)``

    Empirical noise models are routed to the plug-in estimate.
    """
    if noise.kind == EMPIRICAL:
        return gradient_empirical(levels, ys, noise.residuals, n_x, n_y)
    n_x = levels.n if n_x is None else n_x
    if n_x != levels.n:
        raise ShapeError(f"counts sum to {levels.n}, expected n_x={n_x}")
    return (2.0 / n_x) * stationarity_scores(levels, ys, noise, n_y)


def gradient_empirical(levels, ys, eps_star, n_x=None, n_y=None):
    """Plug-in gradient with the residual ECDF standing in for the noise CDF.

    Uses ``B_hat(m) = mean_j ecdf(eps_j + m)``; no tuning parameters.
    """
    noise = eps_star if isinstance(eps_star, NoiseModel) else NoiseModel.empirical(eps_star)
    n_x = levels.n if n_x is None else n_x
    if n_x != levels.n:
        raise ShapeError(f"counts sum to {levels.n}, expected n_x={n_x}")
    return (2.0 / n_x) * stationarity_scores(levels, ys, noise, n_y)


def fenchel_residuals(levels, ys, noise):
    """Absolute first-order residual at each distinct level."""
    return np.abs(stationarity_scores(levels, ys, noise))

