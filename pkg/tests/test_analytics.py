from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tests.oracles import linear_series_backtest_trace
from thc.analytics import (
    AllMissingError,
    CorrelationMode,
    DegenerateSeriesError,
    EmptyCohortError,
    ForecastMethod,
    InsufficientHistoryError,
    InvalidAlphaError,
    KpiSeries,
    LengthMismatchError,
    backtest,
    benchmark,
    correlation_score,
    forecast_ar,
    forecast_es,
    forecast_ma,
    impute,
    rolling_backtest_mae,
    strongly_related,
)

MONTHS = [f"2019-{m:02d}" for m in range(1, 13)]


def series(values, kpi_id="k", account="acme"):
    return KpiSeries(kpi_id, account, list(zip(MONTHS, values)))


class TestKpiSeries:
    def test_rejects_period_gap(self):
        with pytest.raises(ValueError, match="one month"):
            KpiSeries("k", "a", [("2019-01", 3.0), ("2019-03", 3.0)])

    def test_rejects_out_of_scale_values(self):
        with pytest.raises(ValueError, match="outside"):
            KpiSeries("k", "a", [("2019-01", 0.5)])

    def test_year_boundary_ok(self):
        KpiSeries("k", "a", [("2019-12", 3.0), ("2020-01", 3.0)])


class TestImpute:
    def test_single_gap_neighbor_average(self):
        values = [1.0, None, 3.0] + [3.0] * 9
        assert impute(series(values)).values[:3] == [1.0, 2.0, 3.0]

    def test_leading_gap_nearest(self):
        values = [None, 2.0, 3.0] + [3.0] * 9
        assert impute(series(values)).values[:3] == [2.0, 2.0, 3.0]

    def test_trailing_gap_nearest(self):
        values = [3.0] * 10 + [4.0, None]
        assert impute(series(values)).values[-2:] == [4.0, 4.0]

    def test_gap_run_linear_interpolation(self):
        values = [1.0, None, None, 4.0] + [4.0] * 8
        result = impute(series(values)).values[:4]
        # independent oracle: numpy linear interpolation over observed points
        expected = np.interp(range(4), [0, 3], [1.0, 4.0]).tolist()
        assert result == expected == [1.0, 2.0, 3.0, 4.0]

    def test_all_missing_raises(self):
        with pytest.raises(AllMissingError):
            impute(series([None] * 12))

    @given(st.data())
    def test_observed_points_never_altered(self, data):
        values = data.draw(st.lists(
            st.one_of(st.none(), st.floats(1.0, 5.0)), min_size=1, max_size=24))
        months = [f"20{19 + i // 12:02d}-{i % 12 + 1:02d}" for i in range(len(values))]
        src = KpiSeries("k", "a", list(zip(months, values)))
        if all(v is None for v in values):
            with pytest.raises(AllMissingError):
                impute(src)
            return
        result = impute(src)
        assert len(result.points) == len(src.points)
        assert result.periods == src.periods
        assert all(v is not None for v in result.values)
        for original, filled in zip(values, result.values):
            if original is not None:
                assert filled == original

    def test_interpolation_stays_in_scale(self):
        values = [5.0, None, None, None, 1.0] + [1.0] * 7
        for v in impute(series(values)).values:
            assert 1.0 <= v <= 5.0


class TestForecasters:
    def test_ma_examples(self):
        assert forecast_ma([2.0, 4.0, 6.0], 3) == 4.0
        assert forecast_ma([3.0, 3.0, 3.0], 3) == 3.0
        assert forecast_ma([1.0, 2.0, 3.0, 4.0], 2) == (3.0 + 4.0) / 2 == 3.5

    def test_ma_insufficient(self):
        with pytest.raises(InsufficientHistoryError):
            forecast_ma([1.0, 2.0], 3)

    def test_ma_clamps(self):
        assert forecast_ma([9.0, 9.0], 2) == 5.0
        assert forecast_ma([0.0, 0.0], 2) == 1.0

    def test_es_hand_recursion(self):
        # oracle: s1 = 4, s2 = 0.5*2 + 0.5*4
        s = 4.0
        s = 0.5 * 2.0 + 0.5 * s
        assert forecast_es([4.0, 2.0], 0.5) == s == 3.0

    def test_es_alpha_one_is_naive_last_value(self):
        assert forecast_es([1.0, 2.0, 5.0], 1.0) == 5.0

    def test_es_invalid_alpha(self):
        for alpha in (0.0, -0.1, 1.5):
            with pytest.raises(InvalidAlphaError):
                forecast_es([3.0], alpha)

    def test_es_empty(self):
        with pytest.raises(InsufficientHistoryError):
            forecast_es([], 0.3)

    def test_ar_closed_form(self):
        values = [1.0, 2.0, 4.0, 8.0]
        # brute-force least squares for order 1: phi = sum(v[t-1]*v[t]) / sum(v[t-1]^2)
        phi = sum(a * b for a, b in zip(values, values[1:])) / sum(a * a for a in values[:-1])
        assert phi == 2.0
        unclamped = phi * values[-1]
        assert unclamped == 16.0
        assert forecast_ar(values, 1) == 5.0  # clamped

    def test_ar_constant_fixed_point(self):
        assert forecast_ar([3.0, 3.0, 3.0, 3.0], 1) == 3.0

    def test_ar_zero_series_falls_back_to_mean_then_clamps(self):
        assert forecast_ar([0.0] * 6, 1) == 1.0

    def test_ar_insufficient(self):
        with pytest.raises(InsufficientHistoryError):
            forecast_ar([1.0, 2.0], 1)

    def test_ar_higher_order_recovers_exact_ar2(self):
        values = [1.0, 2.0]
        for _ in range(20):
            values.append(0.4 * values[-1] + 0.6 * values[-2])
        predicted = forecast_ar(values, 2)
        expected = 0.4 * values[-1] + 0.6 * values[-2]
        assert predicted == pytest.approx(expected, abs=1e-9)

    @given(st.floats(1.0, 5.0), st.floats(0.01, 1.0))
    def test_constants_reproduced_exactly(self, constant, alpha):
        values = [constant] * 12
        assert forecast_ma(values, 3) == constant
        assert forecast_es(values, alpha) == constant
        assert forecast_ar(values, 1) == constant


class TestBacktest:
    def test_constant_series_zero_mae_all_methods(self):
        constant = series([3.0] * 12)
        for method in ForecastMethod:
            assert backtest(constant, method) == 0.0

    def test_linear_series_ma3_matches_protocol_trace(self):
        values, oracle_mae = linear_series_backtest_trace()
        assert oracle_mae == Fraction(2, 3)
        result = backtest(series(values), ForecastMethod.MA, window=3)
        assert result == pytest.approx(float(oracle_mae), abs=1e-12)

    def test_exactly_four_test_months_for_twelve(self):
        calls = []

        def spy(history):
            calls.append(len(history))
            return history[-1]

        rolling_backtest_mae([3.0] * 12, spy)
        assert calls == [8, 9, 10, 11]

    def test_eight_months_insufficient(self):
        with pytest.raises(InsufficientHistoryError):
            rolling_backtest_mae([3.0] * 8, lambda h: h[-1])

    def test_nine_months_single_test_month(self):
        calls = []
        rolling_backtest_mae([3.0] * 9, lambda h: calls.append(len(h)) or h[-1])
        assert calls == [8]

    def test_longer_series_still_stops_at_month_twelve(self):
        calls = []
        rolling_backtest_mae([3.0] * 15, lambda h: calls.append(len(h)) or h[-1])
        assert calls == [8, 9, 10, 11]

    def test_perfect_forecaster_zero_mae(self):
        rng = random.Random(5)
        values = [rng.uniform(1, 5) for _ in range(12)]

        def clairvoyant(history):
            return values[len(history)]

        assert rolling_backtest_mae(values, clairvoyant) == 0.0

    def test_missing_values_rejected(self):
        incomplete = series([3.0] * 11 + [None])
        with pytest.raises(ValueError, match="impute"):
            backtest(incomplete, ForecastMethod.MA)


class TestCorrelation:
    def test_identical_series_scores_one(self):
        k = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        result = correlation_score(k, list(k), CorrelationMode.RESIDUAL)
        assert result.fitted_values == k
        assert result.score == 1.0
        assert result.strongly_related is True
        assert result.mean_k == 3.5

    def test_hand_evaluated_divergence_between_modes(self):
        k, p = [1.0, 2.0, 3.0], [2.0, 4.0, 6.0]
        # oracle: slope = sum(k*p)/sum(k^2); residual score = 1 - SSR/SST of k
        slope = sum(ki * pi for ki, pi in zip(k, p)) / sum(ki * ki for ki in k)
        fitted = [ki * slope for ki in k]
        mean_k = sum(k) / 3
        ssr = sum((ki - fi) ** 2 for ki, fi in zip(k, fitted))
        sst = sum((ki - mean_k) ** 2 for ki in k)
        assert (slope, fitted) == (2.0, [2.0, 4.0, 6.0])
        assert 1 - ssr / sst == -6.0

        literal = correlation_score(k, p, CorrelationMode.RESIDUAL)
        assert literal.score == -6.0
        assert literal.strongly_related is False
        assert literal.fitted_values == fitted

        squared = correlation_score(k, p, CorrelationMode.R_SQUARED)
        assert squared.score == 1.0
        assert squared.strongly_related is True

    def test_constant_first_series_degenerate(self):
        with pytest.raises(DegenerateSeriesError):
            correlation_score([3.0] * 6, [1, 2, 3, 4, 5, 6.0], CorrelationMode.RESIDUAL)

    def test_constant_second_series_degenerate_in_rsquared(self):
        with pytest.raises(DegenerateSeriesError):
            correlation_score([1, 2, 3, 4, 5, 6.0], [3.0] * 6, CorrelationMode.R_SQUARED)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            correlation_score([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_threshold_is_strict(self):
        assert strongly_related(0.5) is False
        assert strongly_related(0.5000001) is True
        assert strongly_related(0.524) is True

    @given(st.lists(st.floats(1.0, 5.0), min_size=4, max_size=12), st.data())
    def test_rsquared_symmetric_and_bounded(self, k, data):
        p = data.draw(st.lists(st.floats(1.0, 5.0), min_size=len(k), max_size=len(k)))
        try:
            forward = correlation_score(k, p, CorrelationMode.R_SQUARED).score
            backward = correlation_score(p, k, CorrelationMode.R_SQUARED).score
        except DegenerateSeriesError:
            return
        assert forward == pytest.approx(backward, abs=1e-9)
        assert -1e-12 <= forward <= 1.0 + 1e-12


class TestBenchmark:
    NARRATIVE = {"subject": 1.0, "c1": 3.3, "c2": 3.5, "c3": 3.8, "c4": 4.0, "c5": 4.2}

    def test_narrative_fixture(self):
        stats = benchmark("server_ha", "2019-03", "subject", self.NARRATIVE)
        assert stats.account_value == 1.0
        assert stats.cohort_min == 3.3
        assert stats.cohort_median == 3.8
        assert stats.cohort_max == 4.2
        assert stats.cohort_size == 5
        assert stats.below_min is True

    def test_singleton_cohort(self):
        stats = benchmark("k", "2019-03", "s", {"s": 4.5, "other": 4.0})
        assert stats.cohort_min == stats.cohort_median == stats.cohort_max == 4.0
        assert stats.below_min is False

    def test_even_cohort_median_is_midpoint(self):
        stats = benchmark("k", "2019-03", "s", {"s": 3.0, "a": 2.0, "b": 4.0})
        assert stats.cohort_median == 3.0

    def test_subject_excluded_from_cohort(self):
        stats = benchmark("k", "2019-03", "s", {"s": 1.0, "a": 3.0, "b": 5.0})
        assert stats.cohort_min == 3.0  # subject's 1.0 is not a cohort value

    def test_missing_cohort_entries_dropped(self):
        stats = benchmark("k", "2019-03", "s", {"s": 2.0, "a": None, "b": 3.0})
        assert stats.cohort_size == 1

    def test_empty_cohort(self):
        with pytest.raises(EmptyCohortError):
            benchmark("k", "2019-03", "s", {"s": 2.0, "a": None})

    def test_missing_subject(self):
        with pytest.raises(ValueError, match="subject"):
            benchmark("k", "2019-03", "s", {"s": None, "a": 2.0})

    def test_permutation_invariance(self):
        rng = random.Random(17)
        scores = {f"a{i}": rng.uniform(1, 5) for i in range(9)}
        scores["subject"] = 2.5
        baseline = benchmark("k", "2019-03", "subject", scores)
        for _ in range(5):
            items = list(scores.items())
            rng.shuffle(items)
            assert benchmark("k", "2019-03", "subject", dict(items)) == baseline
