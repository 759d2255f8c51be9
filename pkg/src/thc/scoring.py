"""Score quantification: metric normalization, KPI computation, bands, heatmaps.

A raw metric value is min-max normalized onto [0, 10] against its effective
bounds; minimization metrics are then flipped (10 - value) so that higher
always means healthier. A KPI combines its mapped normalized values with
SME weights into ``1 + 0.4 * sum(w_i * o_i)``, landing on [1, 5]. A missing
metric makes its KPI missing; weights are never silently renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .catalog import Catalog, Direction, KpiDef, OperationalMetricDef, ScaleType
from .ingestion import OmObservation

NORM_MAX = 10.0
KPI_MIN = 1.0
KPI_MAX = 5.0


class Band(str, Enum):
    GREEN = "green"
    YELLOW = "yellow"
    RED = "red"


class BoundsProvenance(str, Enum):
    CONFIGURED = "configured"
    CAPTURED_FROM_COHORT = "captured-from-cohort"


class NoCohortDataError(Exception):
    """Every cohort value for a captured metric was missing."""


class UnmappedOmError(Exception):
    """A KPI mapping references a metric absent from the score map."""


class ScoreRangeError(ValueError):
    """A value fell outside the [1, 5] KPI scale."""


@dataclass
class EffectiveBounds:
    om_id: str
    period: str
    lower: float
    upper: float
    provenance: BoundsProvenance

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"bounds for {self.om_id}: lower {self.lower} > upper {self.upper}")


@dataclass
class NormalizedScore:
    om_id: str
    account_id: str
    period: str
    value: float | None


@dataclass
class KpiScore:
    kpi_id: str
    account_id: str
    period: str
    value: float | None
    band: Band | None
    trend: float | None = None


@dataclass
class Contribution:
    om_id: str
    normalized: float | None
    weight: float


@dataclass
class HeatmapNode:
    label: str
    score: float | None
    band: Band | None
    trend: float | None
    children: list["HeatmapNode"] = field(default_factory=list)
    kpi_id: str | None = None
    contributions: list[Contribution] | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children


def configured_bounds(om: OperationalMetricDef, period: str) -> EffectiveBounds:
    if om.scale_type is not ScaleType.CONFIGURED:
        raise ValueError(f"{om.om_id} has no configured bounds")
    return EffectiveBounds(om.om_id, period, om.lower_bound, om.upper_bound,
                           BoundsProvenance.CONFIGURED)


def derive_captured_bounds(
    om_id: str, period: str, cohort_values: Iterable[float | None]
) -> EffectiveBounds:
    """Bounds for a captured metric: the cohort's min/max actuals that month."""
    observed = [v for v in cohort_values if v is not None]
    if not observed:
        raise NoCohortDataError(f"no cohort data for {om_id} in {period}")
    return EffectiveBounds(om_id, period, min(observed), max(observed),
                           BoundsProvenance.CAPTURED_FROM_COHORT)


def normalize_om(
    observation: OmObservation, bounds: EffectiveBounds, direction: Direction
) -> NormalizedScore:
    """Min-max normalize one observation onto [0, 10].

    Out-of-bounds actuals clamp before the minimization flip, so the result
    stays in range. Degenerate bounds (lower == upper) score a neutral 5.0.
    Missing in, missing out.
    """
    key = (observation.om_id, observation.account_id, observation.period)
    if observation.actual_value is None:
        return NormalizedScore(*key, None)
    if bounds.lower == bounds.upper:
        return NormalizedScore(*key, NORM_MAX / 2)
    raw = (observation.actual_value - bounds.lower) / (bounds.upper - bounds.lower) * NORM_MAX
    raw = min(max(raw, 0.0), NORM_MAX)
    value = NORM_MAX - raw if direction is Direction.MIN else raw
    return NormalizedScore(*key, value)


def assign_band(value: float) -> Band:
    """Band for a KPI score: [4,5] green, [2,4) yellow, [1,2) red."""
    if not KPI_MIN <= value <= KPI_MAX:
        raise ScoreRangeError(f"KPI score {value} outside [{KPI_MIN}, {KPI_MAX}]")
    if value >= 4.0:
        return Band.GREEN
    if value >= 2.0:
        return Band.YELLOW
    return Band.RED


def compute_kpi(
    kpi: KpiDef,
    scores: Mapping[str, NormalizedScore],
    *,
    account_id: str | None = None,
    period: str | None = None,
) -> KpiScore:
    """Weighted linear combination of the KPI's normalized metrics.

    Any missing mapped metric makes the KPI missing. A score map that lacks
    a mapped metric entirely is a catalog/data inconsistency and raises.
    """
    values: list[tuple[float, float | None]] = []
    for entry in kpi.mappings:
        if entry.om_id not in scores:
            raise UnmappedOmError(f"KPI {kpi.kpi_id}: no score entry for {entry.om_id!r}")
        values.append((entry.weight, scores[entry.om_id].value))

    sample = next(iter(scores.values()))
    account_id = account_id if account_id is not None else sample.account_id
    period = period if period is not None else sample.period

    if any(v is None for _, v in values):
        return KpiScore(kpi.kpi_id, account_id, period, None, None)

    total = 0.0
    for weight, value in values:
        total += weight * value
    score = 1.0 + 0.4 * total
    # guard float drift at the scale edges; weights sum to 1 by catalog contract
    score = min(max(score, KPI_MIN), KPI_MAX)
    return KpiScore(kpi.kpi_id, account_id, period, score, assign_band(score))


def compute_trend(current: KpiScore, previous: KpiScore | None) -> float | None:
    """Signed change from the last captured value; None without a comparable prior."""
    if previous is None or current.value is None or previous.value is None:
        return None
    return current.value - previous.value


# ---------------------------------------------------------------------------
# heatmap

def _mean_or_none(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def _roll_up(node: HeatmapNode) -> None:
    for child in node.children:
        _roll_up(child)
    if node.is_leaf:
        return
    scores = [c.score for c in node.children if c.score is not None]
    trends = [c.trend for c in node.children if c.trend is not None]
    node.score = _mean_or_none(scores)
    # same unweighted roll-up for the trend as for the score
    node.trend = _mean_or_none(trends)
    node.band = assign_band(node.score) if node.score is not None else None


def build_heatmap(
    account_id: str,
    period: str,
    catalog: Catalog,
    kpi_scores: Mapping[str, KpiScore],
    om_scores: Mapping[str, NormalizedScore],
) -> HeatmapNode:
    """Drill-down tree for one account and month.

    KPIs are grouped along their hierarchy paths under a root labeled with
    the account. Interior nodes carry the arithmetic mean of their
    non-missing children; leaves carry the KPI score plus the contributing
    (metric, normalized value, weight) triples.
    """
    root = HeatmapNode(label=account_id, score=None, band=None, trend=None)
    groups: dict[tuple[str, ...], HeatmapNode] = {(): root}

    def group_node(path: tuple[str, ...]) -> HeatmapNode:
        if path in groups:
            return groups[path]
        parent = group_node(path[:-1])
        node = HeatmapNode(label=path[-1], score=None, band=None, trend=None)
        parent.children.append(node)
        groups[path] = node
        return node

    for kpi in catalog.kpis:
        score = kpi_scores.get(kpi.kpi_id)
        if score is None:
            continue
        contributions = [
            Contribution(
                om_id=m.om_id,
                normalized=om_scores[m.om_id].value if m.om_id in om_scores else None,
                weight=m.weight,
            )
            for m in kpi.mappings
        ]
        leaf = HeatmapNode(
            label=kpi.name,
            score=score.value,
            band=score.band,
            trend=score.trend,
            kpi_id=kpi.kpi_id,
            contributions=contributions,
        )
        group_node(tuple(kpi.hierarchy_path)).children.append(leaf)

    _roll_up(root)
    return root


def heatmap_to_dict(node: HeatmapNode) -> dict:
    """Serialize a heatmap tree to its JSON wire form."""
    out: dict = {
        "label": node.label,
        "score": node.score,
        "band": node.band.value if node.band is not None else None,
        "trend": node.trend,
        "children": [heatmap_to_dict(c) for c in node.children],
    }
    if node.is_leaf:
        out["kpi_id"] = node.kpi_id
        out["contributions"] = [
            {"om_id": c.om_id, "normalized": c.normalized, "weight": c.weight}
            for c in (node.contributions or [])
        ]
    return out
