"""Comparison estimators.

* ``pava``: linked isotonic least squares, the oracle that sees the pairing.
* ``quantile_match``: sorted covariates against sorted responses, joined
  linearly; ignores the noise entirely.
* ``cs_estimator``: deconvolve the response distribution to estimate the CDF
  of ``m0(X)``, then compose its generalized inverse with the covariate ECDF.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from .errors import ConfigError, EmptyInputError, IllPosedError, UnsupportedOperationError
from .io import write_csv_columns
from .isotonic import isotonic_fit
from .noise import GAUSSIAN, LAPLACE
from .stepfn import StepFunction, from_fitted, generalized_inverse

# characteristic-function magnitude below which inversion is refused
CHAR_FN_FLOOR = 1e-12


def pava(xs, ys, domain=None):
    """Linked isotonic regression as a step function on the sorted covariates."""
    ux, fitted, _ = isotonic_fit(xs, ys)
    return from_fitted(ux, fitted, domain)


@dataclass(frozen=True, eq=False)
class MatchedQuantiles:
    """Sorted covariates paired with sorted responses."""

    x: np.ndarray
    y: np.ndarray

    def __call__(self, at):
        # np.interp already extends flat beyond the end points
        return np.interp(np.asarray(at, dtype=float), self.x, self.y)

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    def write_csv(self, path):
        write_csv_columns(path, {"x": self.x, "y": self.y})


def quantile_match(xs, ys):
    """Pair the i-th smallest covariate with the i-th smallest response.

    With unequal sample sizes the longer sample is summarised by its empirical
    quantiles at the shorter sample's plotting positions ``(i - 0.5) / n``.
    """
    xs = np.sort(np.asarray(xs, dtype=float).ravel())
    ys = np.sort(np.asarray(ys, dtype=float).ravel())
    if xs.size == 0 or ys.size == 0:
        raise EmptyInputError("quantile matching needs two nonempty samples")
    if xs.size != ys.size:
        n = min(xs.size, ys.size)
        pos = (np.arange(n) + 0.5) / n
        if xs.size > n:
            xs = np.quantile(xs, pos)
        else:
            ys = np.quantile(ys, pos)
    return MatchedQuantiles(xs, ys)


@dataclass(frozen=True)
class DeconvConfig:
    """Spectral cutoff and evaluation grid for the deconvolution baseline.

    Unset fields are filled from the data: see :func:`default_cutoff` and
    :func:`default_grid`.
    """

    cutoff: float | None = None
    grid: tuple[float, float, int] | None = None

    def __post_init__(self):
        if self.cutoff is not None and not self.cutoff > 0:
            raise ConfigError("cutoff must be positive")
        if self.grid is not None:
            lo, hi, pts = self.grid
            if not lo < hi:
                raise ConfigError("grid must have lo < hi")
            if int(pts) < 16:
                raise ConfigError("grid needs at least 16 points")


def default_cutoff(n, noise):
    """Frequency cutoff T in absolute units.

    Ordinary-smooth noise of order beta: ``n^(1/(2 beta + 1)) / scale``.
    Gaussian noise is supersmooth and gets ``sqrt(log n) / sigma``, which
    keeps ``1 / phi(T) = sqrt(n)``.
    """
    if noise.kind == GAUSSIAN:
        return float(np.sqrt(np.log(max(n, 3))) / noise.scale)
    beta = noise.beta if noise.beta is not None else 2.0
    return float(n ** (1.0 / (2.0 * beta + 1.0)) / noise.scale)


def default_grid(ys, noise, points=1024):
    pad = 5.0 * noise.std()
    return float(np.min(ys) - pad), float(np.max(ys) + pad), int(points)


def _si_kernel_sum(ys, z, cutoff, noise):
    """``sum_j integral_0^T sin(t (Y_j - z)) / (t phi(t)) dt`` for each z."""
    a = ys[None, :] - z[:, None]
    ta = cutoff * a
    total = sici(ta)[0].sum(axis=1)
    if noise.kind == LAPLACE:
        # 1/phi(t) = 1 + lam^2 t^2, so the extra term is lam^2 * integral_0^T t sin(ta) dt
        small = np.abs(ta) < 1e-3
        safe = np.where(small, 1.0, a)
        big = np.sin(ta) / safe**2 - cutoff * np.cos(ta) / safe
        series = cutoff**3 * a / 3.0 - cutoff**5 * a**3 / 30.0 + cutoff**7 * a**5 / 840.0
        total = total + noise.scale**2 * np.where(small, series, big).sum(axis=1)
        return total
    # Gaussian: integral_0^T sin(ta)/t (exp(sigma^2 t^2 / 2) - 1) dt has a smooth integrand
    span = float(np.max(np.abs(a)))
    needed = int(np.ceil(4.0 * cutoff * span / np.pi) + 64)
    if needed > _MAX_NODES:
        # oscillation too fast to resolve by sampling: Filon weights are exact in the frequency
        return total + _filon_sine(lambda t: _gauss_excess(t, noise.scale), a, cutoff).sum(axis=1)
    nodes, weights = np.polynomial.legendre.leggauss(max(128, needed))
    t = 0.5 * cutoff * (nodes + 1.0)
    w = 0.5 * cutoff * weights
    g = _gauss_excess(t, noise.scale)
    # sum_j sin(t (Y_j - z)) = Im(exp(-i t z) * sum_j exp(i t Y_j))
    ecf = np.exp(1j * np.outer(t, ys)).sum(axis=1)
    phase = np.exp(-1j * np.outer(z, t))
    return total + (phase * ecf[None, :]).imag @ (w * g)


_MAX_NODES = 4096
_FILON_PANELS = 200


def _gauss_excess(t, sigma):
    t = np.asarray(t, dtype=float)
    safe = np.where(t == 0, 1.0, t)
    return np.where(t == 0, 0.0, np.expm1(0.5 * (sigma * t) ** 2) / safe)


def _filon_weights(theta):
    """Filon-Simpson coefficients (alpha, beta, gamma), with series near theta = 0."""
    th = np.abs(theta)
    small = th < 0.1
    t = np.where(small, 1.0, th)
    s, c = np.sin(t), np.cos(t)
    alpha = (t * t + t * s * c - 2.0 * s * s) / t**3
    beta = 2.0 * (t * (1.0 + c * c) - 2.0 * s * c) / t**3
    gamma = 4.0 * (s - t * c) / t**3
    t2 = th * th
    alpha_s = th * t2 * (2.0 / 45.0 - t2 * (2.0 / 315.0 - t2 * 2.0 / 4725.0))
    beta_s = 2.0 / 3.0 + t2 * (2.0 / 15.0 - t2 * (4.0 / 105.0 - t2 * 2.0 / 567.0))
    gamma_s = 4.0 / 3.0 - t2 * (2.0 / 15.0 - t2 * (1.0 / 210.0 - t2 / 11340.0))
    # alpha is odd in theta; beta and gamma are even
    alpha = np.sign(theta) * np.where(small, alpha_s, alpha)
    return alpha, np.where(small, beta_s, beta), np.where(small, gamma_s, gamma)


def _filon_sine(f, a, upper, panels=_FILON_PANELS, chunk=4096):
    """``integral_0^upper f(t) sin(a t) dt`` for every entry of ``a`` (f(0) = 0 assumed smooth)."""
    t = np.linspace(0.0, upper, 2 * panels + 1)
    h = t[1] - t[0]
    fv = f(t)
    flat = a.ravel()
    out = np.empty(flat.size)
    for start in range(0, flat.size, chunk):
        ak = flat[start:start + chunk]
        alpha, beta, gamma = _filon_weights(ak * h)
        sines = np.sin(np.outer(ak, t)) * fv[None, :]
        even = sines[:, ::2].sum(axis=1) - 0.5 * (sines[:, 0] + sines[:, -1])
        odd = sines[:, 1::2].sum(axis=1)
        ends = fv[0] * np.cos(ak * t[0]) - fv[-1] * np.cos(ak * t[-1])
        out[start:start + chunk] = h * (alpha * ends + beta * even + gamma * odd)
    return out.reshape(a.shape)


def deconv_cdf_raw(ys, noise, config=None):
    """Spectrally truncated deconvolution estimate of the CDF of ``m0(X)`` on the grid.

    No clipping or monotonization; returns ``(grid, values)``.
    """
    ys = np.asarray(ys, dtype=float).ravel()
    if ys.size == 0:
        raise EmptyInputError("deconvolution needs responses")
    if not noise.is_parametric:
        raise UnsupportedOperationError("deconvolution needs a parametric noise model")
    config = config or DeconvConfig()
    cutoff = config.cutoff if config.cutoff is not None else default_cutoff(ys.size, noise)
    if abs(float(noise.char_fn(cutoff))) < CHAR_FN_FLOOR:
        raise IllPosedError(
            f"noise characteristic function is {float(noise.char_fn(cutoff)):.3g} at the "
            f"cutoff T={cutoff:.4g}; lower the cutoff"
        )
    lo, hi, pts = config.grid if config.grid is not None else default_grid(ys, noise)
    grid = np.linspace(lo, hi, int(pts))
    values = 0.5 - _si_kernel_sum(ys, grid, cutoff, noise) / (np.pi * ys.size)
    return grid, values


def deconv_cdf(ys, noise, config=None):
    """Deconvolved CDF estimate, clipped to [0, 1] and made nondecreasing.

    Monotonization replaces each value by the running maximum to its left.
    """
    grid, values = deconv_cdf_raw(ys, noise, config)
    values = np.maximum.accumulate(np.clip(values, 0.0, 1.0))
    return StepFunction(grid, values, (grid[0], grid[-1]))


def cs_estimator(xs, ys, noise, config=None, domain=None):
    """Deconvolution baseline: generalized inverse of the deconvolved CDF at the covariate ECDF.

    The first and last fitted values are replaced by their interior
    neighbours when they land more than three noise sd outside the
    response range, where the inverse is unstable.
    """
    xs = np.sort(np.asarray(xs, dtype=float).ravel())
    if xs.size == 0:
        raise EmptyInputError("no covariates")
    ys = np.asarray(ys, dtype=float).ravel()
    cdf = deconv_cdf(ys, noise, config)
    ranks = np.searchsorted(xs, xs, side="right") / xs.size
    theta = np.asarray(generalized_inverse(cdf, ranks), dtype=float)
    if theta.size > 2:
        slack = 3.0 * noise.std()
        if theta[-1] > ys.max() + slack:
            theta[-1] = theta[-2]
        if theta[0] < ys.min() - slack:
            theta[0] = theta[1]
    return from_fitted(xs, theta, domain)
