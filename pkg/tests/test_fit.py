import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unlinked_iso.errors import ConfigError, EmptyInputError, MonotonicityError, NumericFailure, ShapeError
from unlinked_iso.fit import FitConfig, default_eps, fit, fit_with_trace_check, initial_levels, merge_groups, merge_pass
from unlinked_iso.noise import NoiseModel

LAP = NoiseModel.laplace(1 / np.sqrt(2))


def lin_data(n=60, seed=0, lam=1 / np.sqrt(2)):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0, 10, n)
    ys = rng.permutation(xs + rng.laplace(0, lam, n))
    return xs, ys


def test_default_eps_examples():
    ys = np.linspace(0, 8, 1000)
    assert default_eps(ys, 1.0) == pytest.approx(0.8)
    assert default_eps(ys, 2.0) == pytest.approx(0.4)
    assert default_eps(np.full(5, 3.0), 1.0) == 1e-8
    with pytest.raises(ConfigError):
        default_eps([1.0], 1.0)


def test_merge_pass_examples():
    m, c = merge_pass(np.array([0.0, 0.05, 0.2, 1.0]), np.array([1, 3, 1, 1]), 0.1)
    np.testing.assert_allclose(m, [0.0375, 0.2, 1.0])
    np.testing.assert_array_equal(c, [4, 1, 1])
    # a chain is anchored at its first member, not its neighbour
    m, c = merge_pass(np.array([0.0, 0.08, 0.16]), np.ones(3, dtype=np.int64), 0.1)
    np.testing.assert_allclose(m, [0.04, 0.16])


def test_merge_pass_keeps_singletons_bitwise():
    vals = np.array([0.1 + 0.2, 7.3, 1e3 / 3])
    m, _ = merge_pass(vals, np.ones(3, dtype=np.int64), 1e-12)
    assert m.tolist() == vals.tolist()


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=40), st.floats(0.01, 10))
def test_merge_groups_soundness(vals, eps):
    m = np.sort(np.array(vals))
    counts = np.ones(m.size, dtype=np.int64)
    gm, gc = merge_groups(m, counts, eps)
    assert gc.sum() == m.size
    # weighted mean is preserved and groups end up separated
    assert np.dot(gm, gc) == pytest.approx(m.sum(), abs=1e-9 * (1 + np.abs(m).sum()))
    assert np.all(np.diff(gm) > eps)
    assert gm.min() >= m.min() - 1e-12 and gm.max() <= m.max() + 1e-12


def test_fit_config_validation():
    with pytest.raises(ConfigError):
        FitConfig(max_iters=0)
    with pytest.raises(ConfigError):
        FitConfig(eps=-1.0)
    with pytest.raises(ConfigError):
        FitConfig(eta=0.0)
    with pytest.raises(ConfigError):
        FitConfig(stop_tol=1e-6)
    with pytest.raises(ConfigError):
        FitConfig(init="random")
    assert FitConfig.simulation_defaults(50).max_iters == 1000
    assert FitConfig(init=[1.0, 2.0]).to_dict()["init"] == [1.0, 2.0]


def test_initial_levels():
    np.testing.assert_array_equal(initial_levels([3.0, 1.0, 2.0], 3), [1.0, 2.0, 3.0])
    np.testing.assert_allclose(initial_levels([0.0, 1.0, 2.0, 3.0], 2), [0.75, 2.25])
    with pytest.raises(ShapeError):
        initial_levels([0.0, 1.0], 2, init=[0.0])
    with pytest.raises(MonotonicityError):
        initial_levels([0.0, 1.0], 2, init=[1.0, 0.0])


def test_fit_input_errors():
    with pytest.raises(EmptyInputError):
        fit([], [1.0], LAP)
    with pytest.raises(ConfigError):
        fit([0.0, np.nan], [1.0, 2.0], LAP)
    with pytest.raises(ConfigError):
        fit([0.0, 1.0], [1.0, 2.0], "laplace")


def _reference_descent(ys, lam, eta, iters):
    """Plain full-vector gradient descent with the Laplace kernels written out."""
    n = ys.size
    m = np.sort(ys).astype(float)

    def cdf(z):
        t = 0.5 * np.exp(-np.abs(z) / lam)
        return np.where(z <= 0, t, 1 - t)

    def bee(z):
        a = np.abs(z) / lam
        t = np.exp(-a) * (0.5 + 0.25 * a)
        return np.where(z <= 0, t, 1 - t)

    for _ in range(iters):
        fit_term = 1 - cdf(ys[None, :] - m[:, None]).mean(axis=1)
        coupling = bee(m[:, None] - m[None, :]).mean(axis=1)
        m = m - eta * (2 / n) * (fit_term - coupling)
    return np.sort(m)


def test_grouping_with_tiny_eps_is_plain_descent():
    xs, ys = lin_data(40, seed=3)
    res = fit(xs, ys, LAP, FitConfig(eps=1e-13, max_iters=300))
    ref = _reference_descent(ys, LAP.scale, 0.5 * 40, 300)
    np.testing.assert_allclose(res.fitted(np.sort(xs)), ref, rtol=0, atol=1e-9)


def test_fit_is_monotone_and_deterministic():
    xs, ys = lin_data(80, seed=1)
    a = fit(xs, ys, LAP, FitConfig(max_iters=400))
    b = fit(xs, ys, LAP, FitConfig(max_iters=400))
    vals = a.fitted(np.sort(xs))
    assert np.all(np.diff(vals) >= 0)
    np.testing.assert_array_equal(vals, b.fitted(np.sort(xs)))
    assert a.iterations_run == 400
    assert a.levels.n == 80


@settings(max_examples=10)
@given(st.floats(-1e3, 1e3).filter(lambda c: abs(c) > 1e-3))
def test_shift_equivariance(c):
    xs, ys = lin_data(30, seed=2)
    cfg = FitConfig(eps=0.05, max_iters=200)
    a = fit(xs, ys, LAP, cfg).fitted(np.sort(xs))
    b = fit(xs, ys + c, LAP, cfg).fitted(np.sort(xs))
    np.testing.assert_allclose(b - c, a, rtol=0, atol=1e-9 * (1 + abs(c)))


def test_near_noiseless_recovers_sorted_responses():
    n, lam = 50, 1e-3
    xs, ys = lin_data(n, seed=4, lam=lam)
    res = fit(xs, ys, NoiseModel.laplace(lam), FitConfig(eps=1e-9, max_iters=200))
    np.testing.assert_allclose(res.fitted(np.sort(xs)), np.sort(ys), atol=2 * lam * np.log(n))


def test_unequal_sample_sizes():
    rng = np.random.default_rng(9)
    xs = rng.uniform(0, 10, 40)
    ys = rng.uniform(0, 10, 90) + rng.laplace(0, LAP.scale, 90)
    res = fit(xs, ys, LAP, FitConfig(max_iters=400))
    assert res.levels.n == 40
    assert np.all(np.diff(res.fitted(np.sort(xs))) >= 0)


def test_tied_covariates_share_a_value():
    xs = np.array([1.0, 1.0, 2.0, 3.0, 3.0, 4.0])
    ys = np.array([0.5, 1.5, 2.0, 2.9, 3.2, 4.4])
    res = fit(xs, ys, LAP, FitConfig(eps=1e-6, max_iters=100))
    assert res.fitted(1.0) == pytest.approx(np.mean(res.levels.expand()[:2]))


def test_trace_check_flags_divergent_step():
    xs, ys = lin_data(40, seed=5)
    try:
        res = fit_with_trace_check(xs, ys, LAP, FitConfig(eta=1e3, eps=1e-6, max_iters=400))
    except NumericFailure:
        return
    assert res.stalled
    assert res.iterations_run < 400


def test_trace_check_quiet_on_default_run():
    xs, ys = lin_data(40, seed=6)
    res = fit_with_trace_check(xs, ys, LAP, FitConfig(max_iters=500))
    assert not res.stalled
    assert len(res.objective_trace) == 50
    assert res.objective_trace[-1] <= res.objective_trace[0]


def test_stop_tol_halts_early():
    xs, ys = lin_data(40, seed=7)
    res = fit(xs, ys, LAP, FitConfig(max_iters=5000, stop_tol=1e-3, monitor_every=10))
    assert res.iterations_run < 5000


def test_stationarity_after_long_run():
    xs, ys = lin_data(60, seed=8)
    res = fit(xs, ys, LAP, FitConfig(max_iters=2000))
    assert res.max_fenchel_residual < 1e-3


def test_result_serialisation():
    xs, ys = lin_data(20, seed=9)
    d = fit(xs, ys, LAP, FitConfig(max_iters=50)).to_dict()
    for key in ("knots", "values", "domain", "iterations", "fenchel_residual", "levels", "counts", "eps", "eta"):
        assert key in d
    assert sum(d["counts"]) == 20
