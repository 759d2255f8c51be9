"""Declarative catalog of operational metrics, KPIs and their weighted mapping.

The catalog is a single JSON document (top-level ``oms`` and ``kpis``
arrays). Loading either returns a fully valid catalog or raises with every
violation listed; there is no partial success. Catalog values are treated
as immutable after construction; what-if re-weighting produces a new
catalog via :func:`apply_weight_overlay`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

from .ingestion import (
    AggregationKind,
    AggregationRule,
    Predicate,
    PredicateClause,
    PredicateOp,
    RecordType,
)

WEIGHT_SUM_TOLERANCE = 1e-9


class ScaleType(str, Enum):
    CONFIGURED = "configured"
    CAPTURED = "captured"


class Direction(str, Enum):
    MIN = "min"
    MAX = "max"


class CombineFunction(str, Enum):
    LINEAR = "linear"


class CatalogError(Exception):
    pass


class ParseError(CatalogError):
    """The document is not structurally a catalog."""


class UnknownKpiError(CatalogError):
    pass


@dataclass
class Finding:
    entity_id: str
    rule_id: str
    message: str


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings


class ValidationError(CatalogError):
    def __init__(self, findings: list[Finding]):
        self.findings = findings
        summary = "; ".join(f"[{f.entity_id}/{f.rule_id}] {f.message}" for f in findings)
        super().__init__(f"catalog validation failed: {summary}")


@dataclass
class OperationalMetricDef:
    om_id: str
    description: str
    scale_type: ScaleType
    direction: Direction
    unit: str
    aggregation: AggregationRule
    lower_bound: float | None = None
    upper_bound: float | None = None


@dataclass
class MappingEntry:
    om_id: str
    weight: float
    combine_function: CombineFunction = CombineFunction.LINEAR


@dataclass
class KpiDef:
    kpi_id: str
    name: str
    hierarchy_path: list[str]
    mappings: list[MappingEntry]


@dataclass
class WeightOverlay:
    kpi_id: str
    weights: dict[str, float]


@dataclass
class Catalog:
    oms: list[OperationalMetricDef]
    kpis: list[KpiDef]
    version: int = 1

    def get_om(self, om_id: str) -> OperationalMetricDef:
        for om in self.oms:
            if om.om_id == om_id:
                return om
        raise KeyError(om_id)

    def get_kpi(self, kpi_id: str) -> KpiDef:
        for kpi in self.kpis:
            if kpi.kpi_id == kpi_id:
                return kpi
        raise UnknownKpiError(f"unknown KPI {kpi_id!r}")


# ---------------------------------------------------------------------------
# parsing

def _require(obj: dict, key: str, context: str) -> Any:
    if key not in obj:
        raise ParseError(f"{context}: missing key {key!r}")
    return obj[key]


def _enum(cls: type, raw: Any, context: str):
    try:
        return cls(str(raw).lower())
    except ValueError:
        allowed = ", ".join(e.value for e in cls)
        raise ParseError(f"{context}: {raw!r} is not one of {allowed}") from None


def _parse_predicate(raw: Any, context: str) -> Predicate:
    if not isinstance(raw, list):
        raise ParseError(f"{context}: predicate must be an array of clauses")
    clauses = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ParseError(f"{context}: clause {i} must be an object")
        clauses.append(
            PredicateClause(
                field=str(_require(item, "field", f"{context} clause {i}")),
                op=_enum(PredicateOp, _require(item, "op", f"{context} clause {i}"),
                         f"{context} clause {i}"),
                value=_require(item, "value", f"{context} clause {i}"),
            )
        )
    return Predicate(clauses)


def _parse_rule(raw: Any, context: str) -> AggregationRule:
    if not isinstance(raw, dict):
        raise ParseError(f"{context}: aggregation must be an object")
    kind = _enum(AggregationKind, _require(raw, "kind", context), context)
    rule = AggregationRule(
        rule_id=str(_require(raw, "rule_id", context)),
        kind=kind,
        record_type=_enum(RecordType, _require(raw, "record_type", context), context),
    )
    if "numerator_predicate" in raw:
        rule.numerator_predicate = _parse_predicate(raw["numerator_predicate"], context)
    if "denominator_predicate" in raw:
        rule.denominator_predicate = _parse_predicate(raw["denominator_predicate"], context)
    if "scale" in raw:
        rule.scale = _number(raw["scale"], f"{context}: scale")
    if "attribute" in raw:
        rule.attribute = str(raw["attribute"])
    return rule


def _number(raw: Any, context: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ParseError(f"{context} must be a number, got {raw!r}")
    return float(raw)


def _parse_om(raw: Any, index: int) -> OperationalMetricDef:
    context = f"oms[{index}]"
    if not isinstance(raw, dict):
        raise ParseError(f"{context} must be an object")
    om_id = str(_require(raw, "om_id", context))
    om = OperationalMetricDef(
        om_id=om_id,
        description=str(raw.get("description", "")),
        scale_type=_enum(ScaleType, _require(raw, "scale_type", context), context),
        direction=_enum(Direction, _require(raw, "direction", context), context),
        unit=str(raw.get("unit", "")),
        aggregation=_parse_rule(_require(raw, "aggregation", context), f"{context} aggregation"),
    )
    if "lower_bound" in raw:
        om.lower_bound = _number(raw["lower_bound"], f"{context}: lower_bound")
    if "upper_bound" in raw:
        om.upper_bound = _number(raw["upper_bound"], f"{context}: upper_bound")
    return om


def _parse_kpi(raw: Any, index: int) -> KpiDef:
    context = f"kpis[{index}]"
    if not isinstance(raw, dict):
        raise ParseError(f"{context} must be an object")
    kpi_id = str(_require(raw, "kpi_id", context))
    path_raw = raw.get("hierarchy_path", [])
    if not isinstance(path_raw, list):
        raise ParseError(f"{context}: hierarchy_path must be an array")
    mappings_raw = _require(raw, "mappings", context)
    if not isinstance(mappings_raw, list):
        raise ParseError(f"{context}: mappings must be an array")
    mappings = []
    for i, m in enumerate(mappings_raw):
        if not isinstance(m, dict):
            raise ParseError(f"{context} mappings[{i}] must be an object")
        mappings.append(
            MappingEntry(
                om_id=str(_require(m, "om_id", f"{context} mappings[{i}]")),
                weight=_number(_require(m, "weight", f"{context} mappings[{i}]"),
                               f"{context} mappings[{i}]: weight"),
                combine_function=_enum(
                    CombineFunction, m.get("combine_function", "linear"),
                    f"{context} mappings[{i}]"),
            )
        )
    return KpiDef(
        kpi_id=kpi_id,
        name=str(raw.get("name", kpi_id)),
        hierarchy_path=[str(p) for p in path_raw],
        mappings=mappings,
    )


def catalog_from_dict(document: dict) -> Catalog:
    """Build a catalog from a parsed document without validating it."""
    if not isinstance(document, dict):
        raise ParseError("catalog document must be a JSON object")
    oms_raw = document.get("oms", [])
    kpis_raw = document.get("kpis", [])
    if not isinstance(oms_raw, list) or not isinstance(kpis_raw, list):
        raise ParseError("'oms' and 'kpis' must be arrays")
    version = document.get("version", 1)
    if not isinstance(version, int) or isinstance(version, bool) or version < 1:
        raise ParseError(f"version must be a positive integer, got {version!r}")
    return Catalog(
        oms=[_parse_om(o, i) for i, o in enumerate(oms_raw)],
        kpis=[_parse_kpi(k, i) for i, k in enumerate(kpis_raw)],
        version=version,
    )


def load_catalog(document: str) -> Catalog:
    """Parse and validate a catalog document; never partially succeeds."""
    try:
        parsed = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    catalog = catalog_from_dict(parsed)
    report = validate_catalog(catalog)
    if not report.ok:
        raise ValidationError(report.findings)
    return catalog


# ---------------------------------------------------------------------------
# serialization

def _predicate_to_list(predicate: Predicate) -> list[dict]:
    return [
        {"field": c.field, "op": c.op.value, "value": c.value} for c in predicate.clauses
    ]


def _rule_to_dict(rule: AggregationRule) -> dict:
    out: dict[str, Any] = {
        "rule_id": rule.rule_id,
        "kind": rule.kind.value,
        "record_type": rule.record_type.value,
    }
    if rule.numerator_predicate is not None:
        out["numerator_predicate"] = _predicate_to_list(rule.numerator_predicate)
    if rule.denominator_predicate is not None:
        out["denominator_predicate"] = _predicate_to_list(rule.denominator_predicate)
    if rule.scale != 100.0:
        out["scale"] = rule.scale
    if rule.attribute is not None:
        out["attribute"] = rule.attribute
    return out


def catalog_to_dict(catalog: Catalog) -> dict:
    oms = []
    for om in catalog.oms:
        entry: dict[str, Any] = {
            "om_id": om.om_id,
            "description": om.description,
            "scale_type": om.scale_type.value,
            "direction": om.direction.value,
            "unit": om.unit,
            "aggregation": _rule_to_dict(om.aggregation),
        }
        # absent bounds are encoded by omitting the key
        if om.lower_bound is not None:
            entry["lower_bound"] = om.lower_bound
        if om.upper_bound is not None:
            entry["upper_bound"] = om.upper_bound
        oms.append(entry)
    kpis = [
        {
            "kpi_id": kpi.kpi_id,
            "name": kpi.name,
            "hierarchy_path": list(kpi.hierarchy_path),
            "mappings": [
                {
                    "om_id": m.om_id,
                    "weight": m.weight,
                    "combine_function": m.combine_function.value,
                }
                for m in kpi.mappings
            ],
        }
        for kpi in catalog.kpis
    ]
    return {"version": catalog.version, "oms": oms, "kpis": kpis}


def serialize_catalog(catalog: Catalog) -> str:
    return json.dumps(catalog_to_dict(catalog), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# validation

def _validate_rule(om: OperationalMetricDef, findings: list[Finding]) -> None:
    rule = om.aggregation
    if rule.kind is AggregationKind.RATIO:
        if rule.numerator_predicate is None or rule.denominator_predicate is None:
            findings.append(Finding(om.om_id, "rule-shape",
                                    "ratio rule requires numerator and denominator predicates"))
    elif rule.kind is AggregationKind.COUNT:
        if rule.numerator_predicate is None:
            findings.append(Finding(om.om_id, "rule-shape",
                                    "count rule requires a numerator predicate"))
    elif rule.kind is AggregationKind.LATEST:
        if not rule.attribute:
            findings.append(Finding(om.om_id, "rule-shape",
                                    "latest rule must name a numeric attribute"))


def validate_catalog(catalog: Catalog) -> ValidationReport:
    """Check every catalog invariant; the report lists all violations."""
    findings: list[Finding] = []

    seen_oms: set[str] = set()
    for om in catalog.oms:
        if om.om_id in seen_oms:
            findings.append(Finding(om.om_id, "duplicate-id", f"duplicate om_id {om.om_id!r}"))
        seen_oms.add(om.om_id)
        if om.scale_type is ScaleType.CONFIGURED:
            if om.lower_bound is None or om.upper_bound is None:
                findings.append(Finding(om.om_id, "configured-missing-bounds",
                                        "configured metric requires both bounds"))
            elif not om.lower_bound < om.upper_bound:
                findings.append(Finding(
                    om.om_id, "bound-order",
                    f"lower_bound {om.lower_bound} must be < upper_bound {om.upper_bound}"))
        else:
            if om.lower_bound is not None or om.upper_bound is not None:
                findings.append(Finding(om.om_id, "captured-with-bounds",
                                        "captured metric must not carry configured bounds"))
        _validate_rule(om, findings)

    seen_kpis: set[str] = set()
    for kpi in catalog.kpis:
        if kpi.kpi_id in seen_kpis:
            findings.append(Finding(kpi.kpi_id, "duplicate-id",
                                    f"duplicate kpi_id {kpi.kpi_id!r}"))
        seen_kpis.add(kpi.kpi_id)
        if not kpi.mappings:
            findings.append(Finding(kpi.kpi_id, "empty-mappings", "KPI maps no metrics"))
            continue
        mapped: set[str] = set()
        for entry in kpi.mappings:
            if entry.om_id in mapped:
                findings.append(Finding(kpi.kpi_id, "duplicate-om-in-kpi",
                                        f"{entry.om_id!r} mapped more than once"))
            mapped.add(entry.om_id)
            if entry.om_id not in seen_oms:
                findings.append(Finding(kpi.kpi_id, "dangling-reference",
                                        f"mapping references unknown om_id {entry.om_id!r}"))
            if not 0 < entry.weight <= 1:
                findings.append(Finding(kpi.kpi_id, "weight-range",
                                        f"weight {entry.weight} outside (0, 1]"))
        total = sum(entry.weight for entry in kpi.mappings)
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            findings.append(Finding(kpi.kpi_id, "weight-sum",
                                    f"weights sum {total:g} ≠ 1"))
    return ValidationReport(findings)


# ---------------------------------------------------------------------------
# what-if overlays

def apply_weight_overlay(catalog: Catalog, overlay: WeightOverlay) -> Catalog:
    """Return a new catalog with one KPI re-weighted; the input is untouched.

    The overlay must cover exactly the KPI's mapped metric ids and satisfy
    the same weight invariants the catalog enforces at load time.
    """
    kpi = catalog.get_kpi(overlay.kpi_id)

    mapped_ids = {m.om_id for m in kpi.mappings}
    overlay_ids = set(overlay.weights)
    if mapped_ids != overlay_ids:
        missing = sorted(mapped_ids - overlay_ids)
        extra = sorted(overlay_ids - mapped_ids)
        parts = []
        if missing:
            parts.append(f"missing {missing}")
        if extra:
            parts.append(f"unexpected {extra}")
        raise ValidationError([Finding(overlay.kpi_id, "overlay-key-mismatch",
                                       "overlay keys must equal mapped metric ids: "
                                       + ", ".join(parts))])

    new_mappings = [replace(m, weight=float(overlay.weights[m.om_id])) for m in kpi.mappings]
    new_kpi = replace(kpi, mappings=new_mappings)
    new_catalog = Catalog(
        oms=list(catalog.oms),
        kpis=[new_kpi if k.kpi_id == kpi.kpi_id else k for k in catalog.kpis],
        version=catalog.version + 1,
    )
    report = validate_catalog(new_catalog)
    if not report.ok:
        raise ValidationError(report.findings)
    return new_catalog
