"""Noise distributions: CDF, density, and the convolution kernel B.

``B(m) = E[Phi(eps + m)]`` is what couples pairs of fitted levels in the
gradient and in the stationarity conditions. Laplace and Gaussian noise get
closed forms; an empirical residual sample gets the plug-in average.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError, EmptyInputError, ShapeError, UnsupportedOperationError
from .io import read_csv_columns
from .isotonic import isotonic_fit

LAPLACE = "laplace"
GAUSSIAN = "gaussian"
EMPIRICAL = "empirical"

# cap on (queries x residuals) evaluated per searchsorted call
_CHUNK = 2_000_000


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Zero-centred error distribution.

    Use the ``laplace``, ``gaussian`` and ``empirical`` constructors rather
    than building instances by hand.
    """

    kind: str
    scale: float = 1.0
    residuals: np.ndarray | None = field(default=None, repr=False)
    symmetrized: bool = False
    beta: float | None = None

    def __post_init__(self):
        if self.kind in (LAPLACE, GAUSSIAN):
            if not (np.isfinite(self.scale) and self.scale > 0):
                raise ConfigError(f"{self.kind} scale must be positive and finite, got {self.scale}")
        elif self.kind == EMPIRICAL:
            res = self.residuals
            if res is None or res.size == 0:
                raise EmptyInputError("empirical noise needs a nonempty residual sample")
            if not np.all(np.isfinite(res)):
                raise ConfigError("residual sample contains non-finite values")
            if np.any(np.diff(res) < 0):
                raise ConfigError("residual sample must be sorted ascending")
        else:
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if self.beta is not None and not self.beta > 0:
            raise ConfigError("beta must be positive")

    # -- constructors -----------------------------------------------------

    @classmethod
    def laplace(cls, lam, beta=2.0):
        # beta defaults to 2: the Laplace characteristic function decays like |t|^-2
        return cls(LAPLACE, float(lam), beta=beta)

    @classmethod
    def gaussian(cls, sigma, beta=None):
        return cls(GAUSSIAN, float(sigma), beta=beta)

    @classmethod
    def empirical(cls, residuals, symmetrize=False, beta=None):
        res = np.asarray(residuals, dtype=float).ravel()
        if res.size == 0:
            raise EmptyInputError("empirical noise needs a nonempty residual sample")
        if symmetrize:
            res = np.concatenate([res, -res])
        res = np.sort(res)
        res.setflags(write=False)
        return cls(EMPIRICAL, float(np.std(res)), residuals=res,
                   symmetrized=bool(symmetrize), beta=beta)

    # -- basic properties -------------------------------------------------

    @property
    def is_parametric(self):
        return self.kind != EMPIRICAL

    @property
    def is_symmetric(self):
        return self.kind != EMPIRICAL or self.symmetrized

    def std(self):
        """Standard deviation of the noise."""
        if self.kind == LAPLACE:
            return float(np.sqrt(2.0) * self.scale)
        if self.kind == GAUSSIAN:
            return float(self.scale)
        return float(np.std(self.residuals))

    def describe(self):
        if self.kind == EMPIRICAL:
            return f"empirical(n={self.residuals.size}{', symmetrized' if self.symmetrized else ''})"
        name = "lambda" if self.kind == LAPLACE else "sigma"
        return f"{self.kind}({name}={self.scale:g})"

    # -- distribution functions -------------------------------------------

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == LAPLACE:
            half_tail = 0.5 * np.exp(-np.abs(z) / self.scale)
            return np.where(z <= 0, half_tail, 1.0 - half_tail)
        if self.kind == GAUSSIAN:
            return ndtr(z / self.scale)
        res = self.residuals
        return np.searchsorted(res, z, side="right") / res.size

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == LAPLACE:
            return np.exp(-np.abs(z) / self.scale) / (2.0 * self.scale)
        if self.kind == GAUSSIAN:
            return np.exp(-0.5 * (z / self.scale) ** 2) / (self.scale * np.sqrt(2.0 * np.pi))
        raise UnsupportedOperationError(
            "empirical noise has no density; use the plug-in gradient instead"
        )

    def bee(self, m):
        """Convolution kernel ``B(m) = E Phi(eps + m)``."""
        m = np.asarray(m, dtype=float)
        if self.kind == LAPLACE:
            a = np.abs(m) / self.scale
            lower = np.exp(-a) * (0.5 + 0.25 * a)
            return np.where(m <= 0, lower, 1.0 - lower)
        if self.kind == GAUSSIAN:
            return ndtr(m / (self.scale * np.sqrt(2.0)))
        return _empirical_bee(self.residuals, m)

    def char_fn(self, t):
        """Characteristic function (real, since both parametric kinds are symmetric)."""
        t = np.asarray(t, dtype=float)
        if self.kind == LAPLACE:
            return 1.0 / (1.0 + (self.scale * t) ** 2)
        if self.kind == GAUSSIAN:
            return np.exp(-0.5 * (self.scale * t) ** 2)
        raise UnsupportedOperationError("deconvolution needs a parametric noise model")


def _empirical_bee(res, m):
    # mean over j of ecdf(res_j + m) = #{(i, j): res_i <= res_j + m} / N^2
    flat = m.ravel()
    n = res.size
    out = np.empty(flat.size)
    step = max(1, _CHUNK // n)
    for start in range(0, flat.size, step):
        block = flat[start:start + step]
        pts = res[None, :] + block[:, None]
        out[start:start + step] = np.searchsorted(res, pts.ravel(), side="right").reshape(pts.shape).sum(axis=1)
    return (out / (n * n)).reshape(m.shape)


def laplace_from_variance(sample_variance):
    """Laplace model matching a residual variance: lambda = sqrt(var / 2)."""
    v = float(sample_variance)
    if not (np.isfinite(v) and v > 0):
        raise ConfigError(f"noise variance must be positive, got {sample_variance}")
    return NoiseModel.laplace(np.sqrt(v / 2.0))


def longitudinal_residuals(pairs):
    """Split repeated responses into midpoints and half-differences.

    Returns ``(ystar, epsstar)`` with ``ystar = (y1 + y2) / 2`` and
    ``epsstar = (y1 - y2) / 2``. Under symmetric noise the half-differences
    have the same law as the noise carried by the midpoints.
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.size == 0:
        raise EmptyInputError("no longitudinal pairs given")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ShapeError(f"expected an (n, 2) array of pairs, got shape {arr.shape}")
    y1, y2 = arr[:, 0], arr[:, 1]
    return (y1 + y2) / 2.0, (y1 - y2) / 2.0


def linked_residuals(linked_xs, linked_ys):
    """Residuals of a linked isotonic fit on a paired subsample."""
    xs = np.asarray(linked_xs, dtype=float)
    ys = np.asarray(linked_ys, dtype=float)
    if xs.shape != ys.shape:
        raise ShapeError(f"linked xs and ys differ in length ({xs.size} vs {ys.size})")
    if xs.size < 2:
        raise ShapeError("need at least two linked pairs to estimate residuals")
    _, _, fitted = isotonic_fit(xs, ys)
    return ys - fitted


def read_residuals_csv(path):
    """Read a single-column ``eps`` CSV."""
    return read_csv_columns(path, ["eps"])["eps"]


def read_pairs_csv(path):
    """Read a two-column ``y1,y2`` CSV into an (n, 2) array."""
    cols = read_csv_columns(path, ["y1", "y2"])
    return np.column_stack([cols["y1"], cols["y2"]])

