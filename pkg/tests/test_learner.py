import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from recsim.errors import FitError, UsageError
from recsim.learner import (ColumnStats, DEGENERATE_STD, apply_stats,
                            column_stats, fit_least_squares, predict,
                            predict_planes, standardize)
from recsim.signals import FeatureMatrix


def make_fm(values, columns=None):
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    return FeatureMatrix(values=values, user_idx=np.zeros(n, dtype=int),
                         item_idx=np.arange(n),
                         columns=columns or [f"c{i}" for i in range(values.shape[1])])


def test_column_stats_are_population_stats():
    vals = np.array([[1.0, 10.0], [3.0, 10.0], [5.0, 10.0]])
    stats = column_stats(vals)
    assert_allclose(stats.mean, [3.0, 10.0])
    assert_allclose(stats.std, [np.sqrt(8.0 / 3.0), 0.0])  # ddof=0
    assert list(stats.degenerate) == [False, True]


def test_standardize_centers_constant_columns_without_scaling():
    fm = make_fm([[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]])
    out, stats = standardize(fm)
    assert_allclose(out.values[:, 1], 0.0)  # centered, not divided by ~0
    assert_allclose(out.values[:, 0].mean(), 0.0, atol=1e-15)
    assert_allclose(out.values[:, 0].std(), 1.0)
    assert stats.degenerate[1]


def test_column_stats_rejects_empty():
    with pytest.raises(UsageError):
        column_stats(np.empty((0, 2)))


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_noiseless_recovery_oracle(seed):
    # exact linear targets: OLS must recover the coefficients to 1e-6
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 3))
    true_w = rng.normal(size=3)
    true_w0 = rng.normal()
    y = true_w0 + X @ true_w
    weights = fit_least_squares(make_fm(X), y)
    assert_allclose(weights.w, true_w, atol=1e-6)
    assert_allclose(weights.w0, true_w0, atol=1e-6)


def test_fit_matches_lstsq_on_noisy_data():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(200, 4))
    y = 2.0 + X @ np.array([1.0, -1.0, 0.5, 0.0]) + 0.3 * rng.normal(size=200)
    weights = fit_least_squares(make_fm(X), y)
    A = np.column_stack([np.ones(200), X])
    ref, *_ = np.linalg.lstsq(A, y, rcond=None)
    assert_allclose(np.r_[weights.w0, weights.w], ref, atol=1e-9)


def test_zero_column_triggers_ridge_fallback_oracle():
    # an all-zero column (a centered degenerate signal, e.g. consumption
    # before anyone consumed) breaks Cholesky; the fallback must agree with
    # an explicit tiny-ridge solve and give the dead column weight 0
    rng = np.random.default_rng(7)
    x = rng.normal(size=80)
    X = np.column_stack([x, np.zeros(80)])
    y = 1.0 + 3.0 * x
    weights = fit_least_squares(make_fm(X), y)
    A = np.column_stack([np.ones(80), X])
    penalty = np.eye(3) * 1e-8
    penalty[0, 0] = 0.0
    ref = np.linalg.solve(A.T @ A + penalty, A.T @ y)
    assert_allclose(np.r_[weights.w0, weights.w], ref, rtol=1e-10)
    assert weights.w[1] == 0.0
    assert_allclose(np.r_[weights.w0, weights.w[0]], [1.0, 3.0], rtol=1e-6)


def test_duplicated_column_solution_is_optimal_and_finite():
    # exact collinearity: whichever branch solves it, the fitted values must
    # match the least-squares optimum
    rng = np.random.default_rng(7)
    x = rng.normal(size=80)
    X = np.column_stack([x, x])
    y = 1.0 + 3.0 * x
    weights = fit_least_squares(make_fm(X), y)
    assert np.all(np.isfinite(weights.w)) and np.isfinite(weights.w0)
    A = np.column_stack([np.ones(80), X])
    ref, *_ = np.linalg.lstsq(A, y, rcond=None)
    assert_allclose(A @ np.r_[weights.w0, weights.w], A @ ref, atol=1e-6)
    assert_allclose(weights.w.sum(), 3.0, atol=1e-6)


def test_underdetermined_fit_raises():
    with pytest.raises(FitError):
        fit_least_squares(make_fm(np.eye(3)), np.ones(3))


def test_sign_sanity_on_utility_shaped_data():
    # quality helps, distance hurts: fitted signs must match
    rng = np.random.default_rng(11)
    q = rng.normal(100, 3, size=500)
    dist = np.abs(rng.normal(0, 3, size=500))
    y = q - dist
    fm, stats = standardize(make_fm(np.column_stack([q, dist])))
    weights = fit_least_squares(fm, y, stats=stats)
    assert weights.w[0] > 0 and weights.w[1] < 0


def test_predict_applies_stored_standardization():
    rng = np.random.default_rng(5)
    X = rng.normal(5.0, 2.0, size=(100, 2))
    y = 1.0 + X @ np.array([2.0, -1.0])
    fm, stats = standardize(make_fm(X))
    weights = fit_least_squares(fm, y, stats=stats)
    for row in X[:5]:
        expected = 1.0 + row @ np.array([2.0, -1.0])
        assert predict(weights, row) == pytest.approx(expected, abs=1e-8)


def test_predict_planes_matches_rowwise_predict():
    rng = np.random.default_rng(9)
    planes = [rng.normal(size=(4, 6)), rng.normal(size=(4, 6))]
    stats = ColumnStats(mean=np.array([0.3, -0.2]), std=np.array([1.5, 0.7]),
                        degenerate=np.array([False, False]))
    weights = fit_least_squares(
        make_fm(rng.normal(size=(30, 2))), rng.normal(size=30), stats=stats)
    dense = predict_planes(weights, planes, stats)
    for j in range(4):
        for i in range(6):
            row = np.array([planes[0][j, i], planes[1][j, i]])
            assert dense[j, i] == pytest.approx(predict(weights, row), abs=1e-12)


def test_apply_stats_degenerate_column_is_exactly_zeroed():
    stats = ColumnStats(mean=np.array([4.0]), std=np.array([DEGENERATE_STD / 10]),
                        degenerate=np.array([True]))
    out = apply_stats(np.full((3, 1), 4.0), stats)
    assert_allclose(out, 0.0)
