"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..analytics import (
    BenchmarkStats,
    CorrelationMode,
    CorrelationResult,
    ForecastMethod,
    ForecastResult,
)
from ..scoring import HeatmapNode, KpiScore


class AccountsResponse(BaseModel):
    accounts: list[str]


class KpiScoreModel(BaseModel):
    kpi_id: str
    account_id: str
    period: str
    value: float | None
    band: str | None
    trend: float | None

    @classmethod
    def from_score(cls, score: KpiScore) -> "KpiScoreModel":
        return cls(
            kpi_id=score.kpi_id,
            account_id=score.account_id,
            period=score.period,
            value=score.value,
            band=score.band.value if score.band else None,
            trend=score.trend,
        )


class ContributionModel(BaseModel):
    om_id: str
    normalized: float | None
    weight: float


class HeatmapNodeModel(BaseModel):
    label: str
    score: float | None
    band: str | None
    trend: float | None
    children: list["HeatmapNodeModel"]
    kpi_id: str | None = None
    contributions: list[ContributionModel] | None = None

    @classmethod
    def from_node(cls, node: HeatmapNode) -> "HeatmapNodeModel":
        return cls(
            label=node.label,
            score=node.score,
            band=node.band.value if node.band else None,
            trend=node.trend,
            children=[cls.from_node(c) for c in node.children],
            kpi_id=node.kpi_id if node.is_leaf else None,
            contributions=(
                [ContributionModel(om_id=c.om_id, normalized=c.normalized, weight=c.weight)
                 for c in (node.contributions or [])]
                if node.is_leaf
                else None
            ),
        )


HeatmapNodeModel.model_rebuild()


class BenchmarkModel(BaseModel):
    kpi_id: str
    period: str
    account_id: str
    account_value: float
    cohort_min: float
    cohort_median: float
    cohort_max: float
    cohort_size: int
    below_min: bool

    @classmethod
    def from_stats(cls, stats: BenchmarkStats, account_id: str) -> "BenchmarkModel":
        return cls(
            kpi_id=stats.kpi_id,
            period=stats.period,
            account_id=account_id,
            account_value=stats.account_value,
            cohort_min=stats.cohort_min,
            cohort_median=stats.cohort_median,
            cohort_max=stats.cohort_max,
            cohort_size=stats.cohort_size,
            below_min=stats.below_min,
        )


class ForecastModel(BaseModel):
    kpi_id: str
    account_id: str
    method: ForecastMethod
    horizon_period: str
    predicted: float
    backtest_mae: float | None

    @classmethod
    def from_result(cls, result: ForecastResult) -> "ForecastModel":
        return cls(
            kpi_id=result.kpi_id,
            account_id=result.account_id,
            method=result.method,
            horizon_period=result.horizon_period,
            predicted=result.predicted,
            backtest_mae=result.backtest_mae,
        )


class CorrelationModel(BaseModel):
    kpi_a: str
    kpi_b: str
    mode: CorrelationMode
    score: float
    strongly_related: bool
    fitted_values: list[float]
    mean_k: float

    @classmethod
    def from_result(cls, result: CorrelationResult) -> "CorrelationModel":
        return cls(
            kpi_a=result.kpi_a,
            kpi_b=result.kpi_b,
            mode=result.mode,
            score=result.score,
            strongly_related=result.strongly_related,
            fitted_values=result.fitted_values,
            mean_k=result.mean_k,
        )


class CorrelationsResponse(BaseModel):
    account_id: str
    mode: CorrelationMode
    window: int
    correlations: list[CorrelationModel]


class WeightOverlayModel(BaseModel):
    kpi_id: str
    weights: dict[str, float]


class WhatIfRequest(BaseModel):
    account_id: str
    period: str
    overlay: WeightOverlayModel


class WhatIfResponse(BaseModel):
    account_id: str
    period: str
    catalog_version: int = Field(description="version of the private overlaid catalog")
    scores: list[KpiScoreModel]


class ValidationFindingModel(BaseModel):
    entity_id: str
    rule_id: str
    message: str
