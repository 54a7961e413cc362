import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, strategies as st

from marketml.market_data import Corpus, daily_pair, embedded_corpus, weekly_pair
from marketml.stats import (
    StatsError, correlation_matrix, excess_kurtosis, fit_line_with_ci, pearson, quantile, skewness,
    student_t_quantile, summarize,
)
from oracles import ols_normal_equations


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="module")
def usa():
    return embedded_corpus(Corpus.USA_DAILY).closes()


@pytest.fixture(scope="module")
def aus():
    return embedded_corpus(Corpus.AUS_DAILY).closes()


def test_usa_summary_values(usa):
    s = summarize(usa)
    assert rel(s.mean, 5870.23) < 1e-3
    assert rel(s.min, 4982.77) < 1e-3
    assert rel(s.max, 6388.64) < 1e-3
    assert rel(s.median, 5954.88) < 1e-3


def test_aus_summary_values(aus):
    s = summarize(aus)
    assert s.count == 130
    assert rel(s.mean, 8274.53) < 1e-3
    assert rel(s.std_dev, 313.92) < 1e-3
    assert abs(s.skewness - -0.79) < 0.05
    assert abs(s.excess_kurtosis - -0.18) < 0.05


def test_constant_series():
    s = summarize([5, 5, 5, 5])
    assert (s.mean, s.std_dev, s.range) == (5, 0, 0)


def test_summary_invariants(aus):
    s = summarize(aus)
    assert s.min <= s.q25 <= s.median <= s.q75 <= s.max
    assert s.range == s.max - s.min
    assert math.isclose(s.variance, s.std_dev**2, rel_tol=1e-9)


def test_summary_rejects_short_and_nonfinite():
    with pytest.raises(StatsError):
        summarize([1, 2, 3])
    with pytest.raises(StatsError):
        summarize([1, 2, 3, float("nan")])


def test_quantile_interpolates():
    assert quantile([1, 2, 3, 4], 0.25) == 1.75


def test_quantile_ends():
    xs = [3.0, -1.0, 7.5, 2.0]
    assert quantile(xs, 0) == -1.0
    assert quantile(xs, 1) == 7.5


def test_quantile_matches_numpy_linear(aus):
    for p in (0.1, 0.25, 0.5, 0.75, 0.9):
        assert quantile(aus, p) == pytest.approx(np.quantile(aus, p, method="linear"), rel=1e-14)


def test_quantile_range_check():
    with pytest.raises(StatsError):
        quantile([1, 2], 1.5)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40), st.floats(0, 1), st.floats(0, 1))
def test_quantile_monotone(xs, p1, p2):
    lo, hi = sorted((p1, p2))
    assert quantile(xs, lo) <= quantile(xs, hi) + 1e-9 * (1 + max(abs(x) for x in xs))


def test_skewness_symmetric():
    assert skewness([1, 2, 3]) == 0.0


def test_skewness_oracle():
    # scipy.stats.skew(bias=False) on this input evaluates to 2.0
    assert skewness([0, 0, 0, 1]) == pytest.approx(2.0, abs=1e-12)


def test_kurtosis_hand_value():
    # m2 = m4 = 1, g2 = -2, G2 = (3 / 2) * (5 * -2 + 6) = -6
    assert excess_kurtosis([-1, -1, 1, 1]) == pytest.approx(-6.0, abs=1e-12)


def test_kurtosis_normal_sample():
    x = np.random.default_rng(20250402).standard_normal(100_000)
    assert abs(excess_kurtosis(x)) < 0.1


def test_moments_match_scipy(usa):
    assert skewness(usa) == pytest.approx(scipy.stats.skew(usa, bias=False), rel=1e-10)
    assert excess_kurtosis(usa) == pytest.approx(scipy.stats.kurtosis(usa, bias=False), rel=1e-10)


def test_moments_reject_constant():
    with pytest.raises(StatsError):
        skewness([2, 2, 2])
    with pytest.raises(StatsError):
        excess_kurtosis([2, 2, 2, 2])


def test_usa_moment_signs(usa):
    assert abs(skewness(usa) - -0.67) < 0.05
    assert abs(excess_kurtosis(usa) - 0.03) < 0.05


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.lists(finite, min_size=6, max_size=30), st.floats(-1e4, 1e4))
def test_translation_invariance(xs, c):
    x = np.array(xs)
    if np.ptp(x) < 1e-3:
        return
    a, b = summarize(x), summarize(x + c)
    assert b.mean == pytest.approx(a.mean + c, rel=1e-9, abs=1e-6)
    assert b.median == pytest.approx(a.median + c, rel=1e-9, abs=1e-6)
    assert b.std_dev == pytest.approx(a.std_dev, rel=1e-6)
    assert b.skewness == pytest.approx(a.skewness, rel=1e-5, abs=1e-5)
    assert b.excess_kurtosis == pytest.approx(a.excess_kurtosis, rel=1e-5, abs=1e-5)


@given(st.lists(finite, min_size=6, max_size=30), st.floats(0.01, 100))
def test_scale_equivariance(xs, c):
    x = np.array(xs)
    if np.ptp(x) < 1e-3:
        return
    a, b = summarize(x), summarize(c * x)
    assert b.std_dev == pytest.approx(c * a.std_dev, rel=1e-9)
    assert b.variance == pytest.approx(c * c * a.variance, rel=1e-9)
    assert b.range == pytest.approx(c * a.range, rel=1e-9)
    assert b.skewness == pytest.approx(a.skewness, rel=1e-7, abs=1e-9)


def test_pearson_exact():
    assert pearson([1, 2, 3], [2, 4, 6]) == 1.0
    assert pearson([1, 2, 3], [3, 2, 1]) == -1.0


def test_pearson_errors():
    with pytest.raises(StatsError):
        pearson([1, 2, 3], [1, 2])
    with pytest.raises(StatsError):
        pearson([1, 1, 1], [1, 2, 3])


@given(st.lists(finite, min_size=3, max_size=30), st.floats(-50, 50), st.floats(-50, 50))
def test_pearson_affine_sign(xs, a, b):
    x = np.array(xs)
    if np.ptp(x) < 1e-2 or abs(a) < 1e-2:
        return
    assert pearson(x, a * x + b) == pytest.approx(math.copysign(1.0, a), abs=1e-9)


def test_daily_close_correlation():
    pair = daily_pair()
    r = pearson(pair.series_a, pair.series_b)
    assert r == pytest.approx(np.corrcoef(pair.series_a, pair.series_b)[0, 1], abs=1e-12)
    assert r > 0


def test_correlation_matrix_identical_columns():
    cm = correlation_matrix({"a": [1.0, 2, 4], "b": [1.0, 2, 4]})
    np.testing.assert_array_equal(cm.r, np.ones((2, 2)))


def test_correlation_matrix_ohlc_oracle():
    cols = daily_pair().named_columns()
    cm = correlation_matrix(cols)
    assert cm.r.shape == (8, 8)
    np.testing.assert_array_equal(cm.r, cm.r.T)
    np.testing.assert_allclose(cm.r, np.corrcoef(np.vstack(list(cols.values()))), atol=1e-12)
    assert len(cm.long_form()) == 64


def test_t_quantile_one_df():
    assert student_t_quantile(0.975, 1) == pytest.approx(12.7062, abs=1e-3)
    assert student_t_quantile(0.975, 1) == pytest.approx(math.tan(0.475 * math.pi), abs=1e-8)


@pytest.mark.parametrize("df", [1, 2, 5, 30, 120])
@pytest.mark.parametrize("p", [0.6, 0.9, 0.975, 0.995])
def test_t_quantile_vs_scipy(df, p):
    assert student_t_quantile(p, df) == pytest.approx(scipy.stats.t.ppf(p, df), abs=1e-8)
    assert student_t_quantile(1 - p, df) == pytest.approx(-scipy.stats.t.ppf(p, df), abs=1e-8)


def test_line_fit_exact_line():
    x = np.arange(6.0)
    fit = fit_line_with_ci(x, 2 * x + 1)
    assert fit.slope == pytest.approx(2, abs=1e-12)
    assert fit.intercept == pytest.approx(1, abs=1e-12)
    _, lo, hi = fit.band(x)
    np.testing.assert_allclose(hi - lo, 0, atol=1e-9)


def test_line_fit_weekly_oracle():
    pair = weekly_pair()
    fit = fit_line_with_ci(pair.series_a, pair.series_b)
    (slope,), intercept = ols_normal_equations(pair.series_a[:, None], pair.series_b)
    assert fit.slope == pytest.approx(slope, rel=1e-9)
    assert fit.intercept == pytest.approx(intercept, rel=1e-9)


def test_band_contains_fit_and_narrowest_at_mean():
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 10, 30)
    y = 3 * x + rng.normal(size=30)
    fit = fit_line_with_ci(x, y)
    grid = np.linspace(-5, 15, 201)
    yhat, lo, hi = fit.band(grid)
    assert np.all(lo <= yhat) and np.all(yhat <= hi)
    assert fit.half_width(x.mean()) <= fit.half_width(grid).min() + 1e-12
    assert fit.half_width(x.mean()) == pytest.approx(fit.t_quantile * fit.residual_std / math.sqrt(30), rel=1e-12)
    assert fit.t_quantile == pytest.approx(scipy.stats.t.ppf(0.975, 28), abs=1e-8)


def test_line_fit_errors():
    with pytest.raises(StatsError):
        fit_line_with_ci([1, 1, 1], [1, 2, 3])
    with pytest.raises(StatsError):
        fit_line_with_ci([1, 2, 3], [1, 2, 3], confidence=1.0)
