"""Pool-adjacent-violators for linked (classical) isotonic least squares."""

import numpy as np

from .errors import EmptyInputError, ShapeError


def pava_values(y, w=None):
    """Weighted least-squares nondecreasing fit of ``y`` (already in x order).

    Stack-based pool-adjacent-violators; O(n).
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise EmptyInputError("pava needs a nonempty 1-d response vector")
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=float)
    if w.shape != y.shape:
        raise ShapeError("weights and responses differ in length")

    # pooled blocks carry (sum of w*y, sum of w); the mean is their ratio
    sums, weights, sizes = [], [], []
    for yi, wi in zip(y.tolist(), w.tolist()):
        sums.append(wi * yi)
        weights.append(wi)
        sizes.append(1)
        while len(sums) > 1 and sums[-2] / weights[-2] > sums[-1] / weights[-1]:
            sums[-2] += sums[-1]
            weights[-2] += weights[-1]
            sizes[-2] += sizes[-1]
            del sums[-1], weights[-1], sizes[-1]
    means = [s / wt for s, wt in zip(sums, weights)]
    return np.repeat(means, sizes)


def pool_ties(xs, ys):
    """Sort by x and collapse tied x values to (x, mean y, count)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ShapeError(f"xs and ys must be 1-d of equal length, got {xs.shape} and {ys.shape}")
    if xs.size == 0:
        raise EmptyInputError("empty sample")
    order = np.argsort(xs, kind="stable")
    ux, inverse, counts = np.unique(xs[order], return_inverse=True, return_counts=True)
    sums = np.bincount(inverse, weights=ys[order])
    return ux, sums / counts, counts


def isotonic_fit(xs, ys):
    """Linked isotonic LSE evaluated at each input x (in the caller's order)."""
    ux, ymean, counts = pool_ties(xs, ys)
    fitted = pava_values(ymean, counts)
    idx = np.searchsorted(ux, np.asarray(xs, dtype=float))
    return ux, fitted, fitted[idx]


def maxmin_oracle(y):
    """O(n^3) max-min formula, the reference for ``pava_values``."""
    y = np.asarray(y, dtype=float)
    n = y.size
    csum = np.concatenate([[0.0], np.cumsum(y)])
    out = np.empty(n)
    for i in range(n):
        best = -np.inf
        for j in range(i + 1):
            inner = min((csum[k + 1] - csum[j]) / (k + 1 - j) for k in range(i, n))
            best = max(best, inner)
        out[i] = best
    return out
