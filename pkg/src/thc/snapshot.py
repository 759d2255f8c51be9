"""End-to-end pipeline runs and the immutable snapshot they produce.

A snapshot holds one run's catalog, observation matrix, normalized scores
and KPI scores. Identical inputs serialize to identical bytes: list order
is fixed, JSON keys are sorted, and ``created_at`` is the watermark of the
newest ingested record rather than wall-clock time. Serving swaps whole
snapshots atomically; readers always see a consistent one.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .catalog import (
    Catalog,
    ScaleType,
    ValidationError,
    WeightOverlay,
    apply_weight_overlay,
    catalog_from_dict,
    catalog_to_dict,
    load_catalog,
    validate_catalog,
)
from .ingestion import (
    FormatError,
    OmObservation,
    OperationalRecord,
    RecordType,
    build_observation_matrix,
    parse_records,
)
from .periods import month_range
from .scoring import (
    Band,
    EffectiveBounds,
    KpiScore,
    NoCohortDataError,
    NormalizedScore,
    compute_kpi,
    compute_trend,
    configured_bounds,
    derive_captured_bounds,
    normalize_om,
)

logger = logging.getLogger(__name__)

EPOCH_WATERMARK = "1970-01-01T00:00:00+00:00"


class PipelineError(Exception):
    """An ingestion or catalog failure, annotated with its source file."""


@dataclass(eq=False)
class Snapshot:
    catalog: Catalog
    accounts: list[str]
    periods: list[str]
    observations: list[OmObservation]
    normalized: list[NormalizedScore]
    kpi_scores: list[KpiScore]
    created_at: str

    def __post_init__(self) -> None:
        self._normalized_index: dict[tuple[str, str], dict[str, NormalizedScore]] = {}
        for score in self.normalized:
            self._normalized_index.setdefault(
                (score.account_id, score.period), {})[score.om_id] = score
        self._kpi_index: dict[tuple[str, str], dict[str, KpiScore]] = {}
        for score in self.kpi_scores:
            self._kpi_index.setdefault(
                (score.account_id, score.period), {})[score.kpi_id] = score

    def normalized_for(self, account_id: str, period: str) -> dict[str, NormalizedScore]:
        return self._normalized_index.get((account_id, period), {})

    def kpi_scores_for(self, account_id: str, period: str) -> dict[str, KpiScore]:
        return self._kpi_index.get((account_id, period), {})

    def series(self, kpi_id: str, account_id: str):
        from .analytics import KpiSeries

        points = []
        for period in self.periods:
            score = self._kpi_index.get((account_id, period), {}).get(kpi_id)
            points.append((period, score.value if score else None))
        return KpiSeries(kpi_id, account_id, points)

    def require_account(self, account_id: str) -> None:
        if account_id not in self.accounts:
            raise LookupError(f"unknown account {account_id!r}")

    def require_period(self, period: str) -> None:
        if period not in self.periods:
            raise LookupError(f"no scores for period {period!r}")

    def previous_period(self, period: str) -> str | None:
        idx = self.periods.index(period)
        return self.periods[idx - 1] if idx > 0 else None


# ---------------------------------------------------------------------------
# serialization

def snapshot_to_dict(snapshot: Snapshot) -> dict:
    return {
        "created_at": snapshot.created_at,
        "catalog": catalog_to_dict(snapshot.catalog),
        "accounts": list(snapshot.accounts),
        "periods": list(snapshot.periods),
        "observations": [
            {"om_id": o.om_id, "account_id": o.account_id, "period": o.period,
             "actual_value": o.actual_value}
            for o in snapshot.observations
        ],
        "normalized": [
            {"om_id": s.om_id, "account_id": s.account_id, "period": s.period,
             "value": s.value}
            for s in snapshot.normalized
        ],
        "kpi_scores": [
            {"kpi_id": s.kpi_id, "account_id": s.account_id, "period": s.period,
             "value": s.value, "band": s.band.value if s.band else None,
             "trend": s.trend}
            for s in snapshot.kpi_scores
        ],
    }


def snapshot_to_json(snapshot: Snapshot) -> str:
    return json.dumps(snapshot_to_dict(snapshot), sort_keys=True, separators=(",", ":"))


def snapshot_from_dict(document: dict) -> Snapshot:
    catalog = catalog_from_dict(document["catalog"])
    report = validate_catalog(catalog)
    if not report.ok:
        raise ValidationError(report.findings)
    return Snapshot(
        catalog=catalog,
        accounts=list(document["accounts"]),
        periods=list(document["periods"]),
        observations=[
            OmObservation(o["om_id"], o["account_id"], o["period"], o["actual_value"])
            for o in document["observations"]
        ],
        normalized=[
            NormalizedScore(s["om_id"], s["account_id"], s["period"], s["value"])
            for s in document["normalized"]
        ],
        kpi_scores=[
            KpiScore(s["kpi_id"], s["account_id"], s["period"], s["value"],
                     Band(s["band"]) if s["band"] else None, s["trend"])
            for s in document["kpi_scores"]
        ],
        created_at=document["created_at"],
    )


def load_snapshot(path: str | Path) -> Snapshot:
    return snapshot_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_snapshot(snapshot: Snapshot, path: str | Path) -> None:
    Path(path).write_text(snapshot_to_json(snapshot), encoding="utf-8")


# ---------------------------------------------------------------------------
# scoring stages

def _effective_bounds(
    catalog: Catalog,
    observations: list[OmObservation],
    periods: list[str],
) -> dict[tuple[str, str], EffectiveBounds | None]:
    """Bounds per (metric, month); captured metrics take that month's cohort
    min/max and are None when the whole cohort is missing."""
    by_om_period: dict[tuple[str, str], list[float | None]] = {}
    for obs in observations:
        by_om_period.setdefault((obs.om_id, obs.period), []).append(obs.actual_value)

    bounds: dict[tuple[str, str], EffectiveBounds | None] = {}
    for om in catalog.oms:
        for period in periods:
            if om.scale_type is ScaleType.CONFIGURED:
                bounds[(om.om_id, period)] = configured_bounds(om, period)
            else:
                cohort = by_om_period.get((om.om_id, period), [])
                try:
                    bounds[(om.om_id, period)] = derive_captured_bounds(
                        om.om_id, period, cohort)
                except NoCohortDataError:
                    bounds[(om.om_id, period)] = None
    return bounds


def score_observations(
    catalog: Catalog,
    observations: list[OmObservation],
    accounts: list[str],
    periods: list[str],
) -> tuple[list[NormalizedScore], list[KpiScore]]:
    """Normalize the observation matrix and compute banded, trended KPI scores."""
    bounds = _effective_bounds(catalog, observations, periods)

    obs_index = {(o.om_id, o.account_id, o.period): o for o in observations}
    normalized: list[NormalizedScore] = []
    norm_index: dict[tuple[str, str, str], NormalizedScore] = {}
    for om in sorted(catalog.oms, key=lambda o: o.om_id):
        for account in accounts:
            for period in periods:
                obs = obs_index.get((om.om_id, account, period))
                if obs is None:
                    obs = OmObservation(om.om_id, account, period, None)
                om_bounds = bounds[(om.om_id, period)]
                if om_bounds is None:
                    score = NormalizedScore(om.om_id, account, period, None)
                else:
                    score = normalize_om(obs, om_bounds, om.direction)
                normalized.append(score)
                norm_index[(om.om_id, account, period)] = score

    kpi_scores: list[KpiScore] = []
    for kpi in sorted(catalog.kpis, key=lambda k: k.kpi_id):
        for account in accounts:
            previous: KpiScore | None = None
            for period in periods:
                score_map = {
                    m.om_id: norm_index[(m.om_id, account, period)]
                    for m in kpi.mappings
                }
                score = compute_kpi(kpi, score_map, account_id=account, period=period)
                score.trend = compute_trend(score, previous)
                kpi_scores.append(score)
                previous = score
    return normalized, kpi_scores


# ---------------------------------------------------------------------------
# pipeline

def _read_records(data_dir: Path) -> list[OperationalRecord]:
    records: list[OperationalRecord] = []
    for record_type in RecordType:
        path = data_dir / f"{record_type.value}.csv"
        if not path.exists():
            continue
        try:
            result = parse_records(path.read_text(encoding="utf-8"), record_type)
        except FormatError as exc:
            raise PipelineError(f"{path}: {exc}") from exc
        for error in result.errors:
            logger.warning("%s:%d: %s (row skipped)", path, error.line, error.message)
        records.extend(result.records)
    return records


def run_pipeline(data_dir: str | Path, catalog_path: str | Path) -> Snapshot:
    """Parse, aggregate, derive bounds, normalize, score and band everything.

    Deterministic: the same files always produce byte-identical snapshots.
    """
    data_dir = Path(data_dir)
    catalog_path = Path(catalog_path)
    if not data_dir.is_dir():
        raise PipelineError(f"data directory not found: {data_dir}")
    if not catalog_path.is_file():
        raise PipelineError(f"catalog file not found: {catalog_path}")

    catalog = load_catalog(catalog_path.read_text(encoding="utf-8"))
    records = _read_records(data_dir)

    accounts = sorted({r.account_id for r in records})
    if records:
        record_periods = [r.period for r in records]
        periods = month_range(min(record_periods), max(record_periods))
        watermark = max(r.timestamp for r in records)
        created_at = watermark.astimezone(timezone.utc).isoformat()
    else:
        periods = []
        created_at = EPOCH_WATERMARK

    observations = build_observation_matrix(records, catalog, periods)
    normalized, kpi_scores = score_observations(catalog, observations, accounts, periods)
    return Snapshot(
        catalog=catalog,
        accounts=accounts,
        periods=periods,
        observations=observations,
        normalized=normalized,
        kpi_scores=kpi_scores,
        created_at=created_at,
    )


# ---------------------------------------------------------------------------
# what-if

def whatif_scores(
    snapshot: Snapshot, account_id: str, period: str, overlay: WeightOverlay
) -> list[KpiScore]:
    """KPI scores for one (account, month) under a re-weighted catalog.

    Computes on a private catalog copy; the snapshot itself is never
    touched. An identity overlay reproduces the stored scores bit for bit.
    """
    snapshot.require_account(account_id)
    snapshot.require_period(period)
    overlaid = apply_weight_overlay(snapshot.catalog, overlay)

    current = snapshot.normalized_for(account_id, period)
    prev_period = snapshot.previous_period(period)
    previous = snapshot.normalized_for(account_id, prev_period) if prev_period else None

    scores = []
    for kpi in sorted(overlaid.kpis, key=lambda k: k.kpi_id):
        score = compute_kpi(kpi, current, account_id=account_id, period=period)
        if previous is not None:
            prior = compute_kpi(kpi, previous, account_id=account_id, period=prev_period)
            score.trend = compute_trend(score, prior)
        scores.append(score)
    return scores


# ---------------------------------------------------------------------------
# store

class SnapshotStore:
    """Holds the served snapshot; reads are lock-free, swaps are atomic."""

    def __init__(self, snapshot: Snapshot | None = None):
        self._snapshot = snapshot
        self._swap_lock = threading.Lock()

    def get(self) -> Snapshot:
        snapshot = self._snapshot
        if snapshot is None:
            raise LookupError("no snapshot loaded")
        return snapshot

    def swap(self, snapshot: Snapshot) -> None:
        with self._swap_lock:
            self._snapshot = snapshot
