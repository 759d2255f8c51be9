"""Analytics over monthly KPI score histories.

Covers gap imputation, one-month-ahead forecasting (moving average,
autoregression, exponential smoothing) with a rolling-origin backtest,
pairwise KPI correlation, and cross-account benchmarking. All forecasts
clamp to the [1, 5] KPI scale; scores outside it are uninformative.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np

from .periods import months_between
from .scoring import KPI_MAX, KPI_MIN

# backtest protocol: predict each of months 9..12 from all prior months
FIRST_TARGET_MONTH = 9
LAST_TARGET_MONTH = 12

STRONG_CORRELATION_THRESHOLD = 0.5
DEFAULT_CORRELATION_WINDOW = 6
DEFAULT_MA_WINDOW = 3
DEFAULT_AR_ORDER = 1
DEFAULT_ES_ALPHA = 0.3


class AllMissingError(Exception):
    """A series with no observed point cannot be imputed."""


class InsufficientHistoryError(Exception):
    pass


class InvalidAlphaError(ValueError):
    pass


class DegenerateSeriesError(Exception):
    """Constant input leaves the correlation score undefined."""


class LengthMismatchError(ValueError):
    pass


class EmptyCohortError(Exception):
    """No other account has an observed score to benchmark against."""


class ForecastMethod(str, Enum):
    MA = "ma"
    AR = "ar"
    ES = "es"


class CorrelationMode(str, Enum):
    # residual: 1 - SSR/SST of a through-origin fit, measured against the
    # first series; can leave [0, 1] and is not symmetric.
    RESIDUAL = "residual"
    # rsquared: squared product-moment correlation; symmetric, in [0, 1].
    R_SQUARED = "rsquared"


@dataclass
class KpiSeries:
    """Consecutive monthly scores for one (KPI, account)."""

    kpi_id: str
    account_id: str
    points: list[tuple[str, float | None]]

    def __post_init__(self) -> None:
        for (earlier, _), (later, _) in zip(self.points, self.points[1:]):
            if months_between(earlier, later) != 1:
                raise ValueError(f"periods must advance by one month: {earlier} -> {later}")
        for period, value in self.points:
            if value is not None and not KPI_MIN <= value <= KPI_MAX:
                raise ValueError(f"score {value} at {period} outside [{KPI_MIN}, {KPI_MAX}]")

    @property
    def periods(self) -> list[str]:
        return [p for p, _ in self.points]

    @property
    def values(self) -> list[float | None]:
        return [v for _, v in self.points]


@dataclass
class BenchmarkStats:
    kpi_id: str
    period: str
    account_value: float
    cohort_min: float
    cohort_median: float
    cohort_max: float
    cohort_size: int
    below_min: bool


@dataclass
class ForecastResult:
    kpi_id: str
    account_id: str
    method: ForecastMethod
    horizon_period: str
    predicted: float
    backtest_mae: float | None


@dataclass
class CorrelationResult:
    kpi_a: str
    kpi_b: str
    mode: CorrelationMode
    score: float
    strongly_related: bool
    fitted_values: list[float]
    mean_k: float


def _clamp_score(value: float) -> float:
    return min(max(value, KPI_MIN), KPI_MAX)


# ---------------------------------------------------------------------------
# imputation

def impute(series: KpiSeries) -> KpiSeries:
    """Fill gaps: interior runs interpolate linearly between the flanking
    observed values (a single gap becomes its neighbors' average), leading
    and trailing gaps copy the nearest observed value. Observed points are
    never altered.
    """
    values = series.values
    observed = [i for i, v in enumerate(values) if v is not None]
    if not observed:
        raise AllMissingError(f"{series.kpi_id}/{series.account_id}: no observed scores")

    filled = list(values)
    for i in range(observed[0]):
        filled[i] = values[observed[0]]
    for i in range(observed[-1] + 1, len(values)):
        filled[i] = values[observed[-1]]
    for left, right in zip(observed, observed[1:]):
        step = (values[right] - values[left]) / (right - left)
        for i in range(left + 1, right):
            filled[i] = values[left] + step * (i - left)

    return KpiSeries(series.kpi_id, series.account_id,
                     list(zip(series.periods, filled)))


# ---------------------------------------------------------------------------
# forecasters

def forecast_ma(values: Sequence[float], window: int = DEFAULT_MA_WINDOW) -> float:
    """Mean of the last ``window`` values.

    Uses exact-rational averaging so a constant window forecasts the
    constant bit for bit.
    """
    if window < 1:
        raise ValueError("window must be positive")
    if len(values) < window:
        raise InsufficientHistoryError(f"need {window} points, have {len(values)}")
    return _clamp_score(statistics.mean(values[-window:]))


def forecast_es(values: Sequence[float], alpha: float = DEFAULT_ES_ALPHA) -> float:
    """Simple exponential smoothing; the forecast is the final level.

    The level update s + alpha*(v - s) is the textbook recursion
    alpha*v + (1-alpha)*s rearranged so a constant series is a float
    fixed point.
    """
    if not 0 < alpha <= 1:
        raise InvalidAlphaError(f"alpha {alpha} outside (0, 1]")
    if not values:
        raise InsufficientHistoryError("need at least one point")
    level = values[0]
    for value in values[1:]:
        level = level + alpha * (value - level)
    return _clamp_score(level)


def forecast_ar(values: Sequence[float], order: int = DEFAULT_AR_ORDER) -> float:
    """Autoregression without intercept, fit by ordinary least squares.

    Singular normal equations (e.g. an all-zero series) fall back to the
    series mean.
    """
    if order < 1:
        raise ValueError("order must be positive")
    n = len(values)
    if n < order + 2:
        raise InsufficientHistoryError(f"need {order + 2} points for order {order}, have {n}")
    x = np.asarray(values, dtype=float)
    design = np.column_stack([x[order - lag : n - lag] for lag in range(1, order + 1)])
    targets = x[order:]
    gram = design.T @ design
    if np.linalg.matrix_rank(gram) < order:
        return _clamp_score(statistics.mean(values))
    phi = np.linalg.solve(gram, design.T @ targets)
    recent = x[::-1][:order]  # [v_n, v_{n-1}, ...]
    return _clamp_score(float(phi @ recent))


_FORECASTERS: dict[ForecastMethod, Callable[..., float]] = {
    ForecastMethod.MA: forecast_ma,
    ForecastMethod.AR: forecast_ar,
    ForecastMethod.ES: forecast_es,
}


def make_forecaster(
    method: ForecastMethod,
    *,
    window: int = DEFAULT_MA_WINDOW,
    order: int = DEFAULT_AR_ORDER,
    alpha: float = DEFAULT_ES_ALPHA,
) -> Callable[[Sequence[float]], float]:
    if method is ForecastMethod.MA:
        return lambda values: forecast_ma(values, window)
    if method is ForecastMethod.AR:
        return lambda values: forecast_ar(values, order)
    return lambda values: forecast_es(values, alpha)


# ---------------------------------------------------------------------------
# backtesting

def rolling_backtest_mae(
    values: Sequence[float], predict: Callable[[Sequence[float]], float]
) -> float:
    """Mean absolute error of one-month-ahead predictions for months 9..12.

    Each target month m is predicted from months 1..m-1 only. Series
    shorter than 12 months evaluate whatever target months exist (at least
    month 9); series longer than 12 still stop at month 12.
    """
    n = len(values)
    if n < FIRST_TARGET_MONTH:
        raise InsufficientHistoryError(
            f"backtest needs at least {FIRST_TARGET_MONTH} months, have {n}")
    errors = []
    for month in range(FIRST_TARGET_MONTH, min(n, LAST_TARGET_MONTH) + 1):
        predicted = predict(values[: month - 1])
        errors.append(abs(predicted - values[month - 1]))
    return sum(errors) / len(errors)


def backtest(
    series: KpiSeries,
    method: ForecastMethod,
    *,
    window: int = DEFAULT_MA_WINDOW,
    order: int = DEFAULT_AR_ORDER,
    alpha: float = DEFAULT_ES_ALPHA,
) -> float:
    values = series.values
    if any(v is None for v in values):
        raise ValueError("series has missing values; impute before backtesting")
    predictor = make_forecaster(method, window=window, order=order, alpha=alpha)
    return rolling_backtest_mae(values, predictor)


# ---------------------------------------------------------------------------
# correlation

def strongly_related(score: float) -> bool:
    """Strictly above the empirical 0.5 threshold."""
    return score > STRONG_CORRELATION_THRESHOLD


def correlation_score(
    k: Sequence[float],
    p: Sequence[float],
    mode: CorrelationMode = CorrelationMode.R_SQUARED,
    *,
    kpi_a: str = "",
    kpi_b: str = "",
) -> CorrelationResult:
    """Correlation between two KPI histories over the same months.

    Both modes share the through-origin fit f_i = k_i * (sum k_j p_j / sum
    k_j^2). ``residual`` scores 1 - sum((k_i - f_i)^2) / sum((k_i - kbar)^2);
    ``rsquared`` scores the squared product-moment correlation of k and p.
    """
    if len(k) != len(p):
        raise LengthMismatchError(f"series lengths differ: {len(k)} vs {len(p)}")
    n = len(k)
    if n < 2:
        raise LengthMismatchError("need at least two points")

    mean_k = sum(k) / n
    spread_k = sum((ki - mean_k) ** 2 for ki in k)
    if spread_k == 0:
        raise DegenerateSeriesError("first series is constant")
    sum_sq_k = sum(ki * ki for ki in k)
    slope = sum(ki * pi for ki, pi in zip(k, p)) / sum_sq_k
    fitted = [ki * slope for ki in k]

    if mode is CorrelationMode.RESIDUAL:
        residual = sum((ki - fi) ** 2 for ki, fi in zip(k, fitted))
        score = 1.0 - residual / spread_k
    else:
        mean_p = sum(p) / n
        spread_p = sum((pi - mean_p) ** 2 for pi in p)
        if spread_p == 0:
            raise DegenerateSeriesError("second series is constant")
        cross = sum((ki - mean_k) * (pi - mean_p) for ki, pi in zip(k, p))
        score = cross * cross / (spread_k * spread_p)

    return CorrelationResult(
        kpi_a=kpi_a,
        kpi_b=kpi_b,
        mode=mode,
        score=score,
        strongly_related=strongly_related(score),
        fitted_values=fitted,
        mean_k=mean_k,
    )


# ---------------------------------------------------------------------------
# benchmarking

def benchmark(
    kpi_id: str,
    period: str,
    subject_account: str,
    scores: Mapping[str, float | None],
) -> BenchmarkStats:
    """Order statistics of every other account's score for one KPI and month.

    The cohort excludes the subject account; its missing entries are
    dropped. Medians of even-sized cohorts average the two middle values.
    """
    subject_value = scores.get(subject_account)
    if subject_value is None:
        raise ValueError(f"no observed score for subject account {subject_account!r}")
    cohort = sorted(
        value
        for account, value in scores.items()
        if account != subject_account and value is not None
    )
    if not cohort:
        raise EmptyCohortError(f"no cohort scores for {kpi_id} in {period}")
    return BenchmarkStats(
        kpi_id=kpi_id,
        period=period,
        account_value=subject_value,
        cohort_min=cohort[0],
        cohort_median=float(statistics.median(cohort)),
        cohort_max=cohort[-1],
        cohort_size=len(cohort),
        below_min=subject_value < cohort[0],
    )
