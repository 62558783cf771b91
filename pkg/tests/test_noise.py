import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from conftest import quad_bee
from unlinked_iso.errors import ConfigError, EmptyInputError, ShapeError, UnsupportedOperationError
from unlinked_iso.noise import (
    NoiseModel,
    laplace_from_variance,
    linked_residuals,
    longitudinal_residuals,
)

PARAMETRIC = [NoiseModel.laplace(0.5), NoiseModel.laplace(1.0), NoiseModel.gaussian(1.0), NoiseModel.gaussian(2.0)]


def test_cdf_examples():
    assert NoiseModel.laplace(1.0).cdf(0.0) == 0.5
    assert NoiseModel.laplace(1.0).cdf(1.0) == pytest.approx(1 - np.exp(-1) / 2, abs=1e-15)
    assert NoiseModel.empirical([-1.0, 1.0]).cdf(0.0) == 0.5


def test_laplace_cdf_matches_integrated_density():
    lap = NoiseModel.laplace(1.0)
    val, _ = integrate.quad(lambda z: float(lap.pdf(z)), -np.inf, 1.0, epsabs=1e-13)
    assert val == pytest.approx(0.8160602794142788, abs=1e-10)
    assert float(lap.cdf(1.0)) == pytest.approx(val, abs=1e-10)


def test_pdf_examples():
    assert NoiseModel.laplace(1.0).pdf(0.0) == 0.5
    assert NoiseModel.gaussian(1.0).pdf(0.0) == pytest.approx(0.3989422804014327, rel=1e-14)
    assert NoiseModel.laplace(2.0).pdf(-2.0) == pytest.approx(np.exp(-1) / 4, rel=1e-14)


@pytest.mark.parametrize("noise", PARAMETRIC, ids=lambda n: n.describe())
def test_pdf_integrates_to_one(noise):
    val, _ = integrate.quad(lambda z: float(noise.pdf(z)), -np.inf, np.inf, points=None, epsabs=1e-12)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_empirical_has_no_density():
    with pytest.raises(UnsupportedOperationError):
        NoiseModel.empirical([0.0, 1.0]).pdf(0.0)


def test_bee_examples():
    for noise in PARAMETRIC:
        assert noise.bee(0.0) == pytest.approx(0.5, abs=1e-15)
    assert NoiseModel.laplace(1.0).bee(-1.0) == pytest.approx(0.75 * np.exp(-1), abs=1e-15)
    assert NoiseModel.gaussian(1.0).bee(1.0) == pytest.approx(0.7602499389065233, abs=1e-14)


def test_laplace_bee_against_quadrature_at_minus_one():
    lap = NoiseModel.laplace(1.0)
    assert quad_bee(lap, -1.0) == pytest.approx(0.27590958087858175, abs=1e-10)


def test_gaussian_bee_against_monte_carlo(rng):
    g = NoiseModel.gaussian(1.0)
    eps = rng.normal(size=400_000)
    mc = g.cdf(eps + 1.0).mean()
    assert abs(mc - float(g.bee(1.0))) < 3e-3


@pytest.mark.parametrize("noise", PARAMETRIC, ids=lambda n: n.describe())
def test_closed_form_bee_matches_quadrature(noise):
    grid = np.arange(-10.0, 10.0 + 1e-9, 0.5)
    closed = noise.bee(grid)
    oracle = np.array([quad_bee(noise, m) for m in grid])
    assert np.max(np.abs(closed - oracle)) < 1e-8


@given(st.floats(-50, 50), st.sampled_from(PARAMETRIC))
def test_bee_antisymmetry(m, noise):
    assert abs(noise.bee(m) + noise.bee(-m) - 1.0) < 1e-12


@given(st.floats(-30, 30), st.sampled_from(PARAMETRIC))
def test_cdf_symmetry(z, noise):
    assert abs(noise.cdf(-z) - (1.0 - noise.cdf(z))) < 1e-15


@given(st.lists(st.floats(-20, 20), min_size=2, max_size=30), st.sampled_from(PARAMETRIC))
def test_bee_and_cdf_monotone(ms, noise):
    ms = np.sort(ms)
    assert np.all(np.diff(noise.bee(ms)) >= 0)
    assert np.all(np.diff(noise.cdf(ms)) >= 0)


def test_cdf_limits():
    for noise in PARAMETRIC:
        assert noise.cdf(-1e3) == pytest.approx(0.0, abs=1e-300)
        assert noise.cdf(1e3) == 1.0


def test_empirical_bee_is_plugin_average():
    res = np.array([-1.0, 0.5, 2.0])
    emp = NoiseModel.empirical(res)
    for m in (-2.0, -0.3, 0.0, 1.5):
        expected = np.mean([np.mean(res <= r + m) for r in res])
        assert emp.bee(m) == pytest.approx(expected, abs=1e-15)


def test_empirical_bee_converges_to_laplace(rng):
    lam = 1.0
    lap = NoiseModel.laplace(lam)
    grid = np.linspace(-3, 3, 61)
    gaps = []
    for size in (100, 1000, 10_000):
        # average over a few residual draws so the trend is not a coin flip
        g = [np.max(np.abs(NoiseModel.empirical(rng.laplace(0, lam, size)).bee(grid) - lap.bee(grid)))
             for _ in range(5)]
        gaps.append(np.mean(g))
    assert gaps[0] > gaps[1] > gaps[2]


def test_empirical_symmetrize():
    emp = NoiseModel.empirical([1.0, 2.0], symmetrize=True)
    np.testing.assert_array_equal(emp.residuals, [-2.0, -1.0, 1.0, 2.0])
    # pairs with r_i <= r_j: the 6 strictly ordered ones plus the 4 ties on the diagonal
    assert emp.bee(0.0) == 10 / 16


def test_invalid_parameters():
    with pytest.raises(ConfigError):
        NoiseModel.laplace(0.0)
    with pytest.raises(ConfigError):
        NoiseModel.gaussian(-1.0)
    with pytest.raises(EmptyInputError):
        NoiseModel.empirical([])


def test_laplace_from_variance():
    assert laplace_from_variance(2.0).scale == 1.0
    assert laplace_from_variance(8.0).scale == 2.0
    with pytest.raises(ConfigError):
        laplace_from_variance(0.0)


def test_longitudinal_residuals():
    ystar, eps = longitudinal_residuals([(4, 2)])
    np.testing.assert_array_equal(ystar, [3.0])
    np.testing.assert_array_equal(eps, [1.0])
    ystar, eps = longitudinal_residuals([(2.5, 2.5)])
    np.testing.assert_array_equal(ystar, [2.5])
    np.testing.assert_array_equal(eps, [0.0])
    ystar, eps = longitudinal_residuals([(0, 2), (2, 0)])
    np.testing.assert_array_equal(ystar, [1.0, 1.0])
    np.testing.assert_array_equal(eps, [-1.0, 1.0])
    with pytest.raises(EmptyInputError):
        longitudinal_residuals([])


def test_linked_residuals():
    np.testing.assert_allclose(linked_residuals([1, 2], [0, 2]), [0, 0])
    np.testing.assert_allclose(linked_residuals([1, 2], [2, 0]), [1, -1])
    with pytest.raises(ShapeError):
        linked_residuals([1], [5])
    with pytest.raises(ShapeError):
        linked_residuals([1, 2, 3], [5, 6])


@given(st.lists(st.tuples(st.floats(0, 10), st.floats(-10, 10)), min_size=2, max_size=40))
def test_linked_residuals_sum_to_zero(pairs):
    xs, ys = np.array(pairs).T
    assert abs(linked_residuals(xs, ys).sum()) < 1e-9
