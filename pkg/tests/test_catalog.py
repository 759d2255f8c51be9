from __future__ import annotations

import json
import random

import pytest

from thc.catalog import (
    Catalog,
    ParseError,
    UnknownKpiError,
    ValidationError,
    WeightOverlay,
    apply_weight_overlay,
    load_catalog,
    serialize_catalog,
    validate_catalog,
)


def test_load_table_catalog_accepts_quarter_weights(table_catalog):
    kpi = table_catalog.get_kpi("db_resiliency")
    assert [m.weight for m in kpi.mappings] == [0.25, 0.25, 0.25, 0.25]
    assert sum(m.weight for m in kpi.mappings) == pytest.approx(1.0, abs=1e-9)


def test_load_empty_catalog(table_catalog_doc):
    catalog = load_catalog(json.dumps({"oms": [], "kpis": []}))
    assert catalog.oms == []
    assert catalog.kpis == []
    assert catalog.version == 1


def test_weight_sum_violation_reported(table_catalog_doc):
    doc = table_catalog_doc
    doc["kpis"][0]["mappings"] = [
        {"om_id": "db_space_tickets", "weight": 0.3},
        {"om_id": "db_handler_tickets", "weight": 0.3},
        {"om_id": "db2_down_tickets", "weight": 0.3},
    ]
    with pytest.raises(ValidationError) as excinfo:
        load_catalog(json.dumps(doc))
    findings = excinfo.value.findings
    assert any(f.rule_id == "weight-sum" and "0.9" in f.message for f in findings)


def test_load_reports_every_violation_not_just_first(table_catalog_doc):
    doc = table_catalog_doc
    doc["oms"][1]["lower_bound"] = 0  # captured metric with a bound
    doc["kpis"][0]["mappings"][0]["om_id"] = "no_such_metric"
    with pytest.raises(ValidationError) as excinfo:
        load_catalog(json.dumps(doc))
    rules = {f.rule_id for f in excinfo.value.findings}
    assert "captured-with-bounds" in rules
    assert "dangling-reference" in rules


@pytest.mark.parametrize(
    "document,match",
    [
        ("{not json", "malformed JSON"),
        ('{"oms": 4, "kpis": []}', "must be arrays"),
        ('{"oms": [], "kpis": [], "version": 0}', "positive integer"),
    ],
)
def test_parse_errors(document, match):
    with pytest.raises(ParseError, match=match):
        load_catalog(document)


def test_parse_error_on_unknown_enum(table_catalog_doc):
    table_catalog_doc["oms"][0]["direction"] = "sideways"
    with pytest.raises(ParseError, match="sideways"):
        load_catalog(json.dumps(table_catalog_doc))


def test_validate_clean_catalog_has_no_findings(table_catalog):
    assert validate_catalog(table_catalog).ok


def test_validate_captured_with_bounds(table_catalog):
    table_catalog.oms[1].upper_bound = 50.0
    report = validate_catalog(table_catalog)
    assert [f.rule_id for f in report.findings] == ["captured-with-bounds"]
    assert report.findings[0].entity_id == "server_change_failure_rate"


def test_validate_dangling_reference(table_catalog):
    table_catalog.kpis[0].mappings[0].om_id = "ghost"
    report = validate_catalog(table_catalog)
    assert any(f.rule_id == "dangling-reference" for f in report.findings)


def test_validate_bound_order_and_weight_range(table_catalog):
    table_catalog.oms[0].lower_bound = 100.0
    table_catalog.oms[0].upper_bound = 0.0
    table_catalog.kpis[0].mappings[0].weight = -0.25
    rules = {f.rule_id for f in validate_catalog(table_catalog).findings}
    assert "bound-order" in rules
    assert "weight-range" in rules


def test_validate_duplicate_ids(table_catalog_doc):
    doc = table_catalog_doc
    doc["oms"].append(doc["oms"][0])
    doc["kpis"].append(doc["kpis"][1])
    with pytest.raises(ValidationError) as excinfo:
        load_catalog(json.dumps(doc))
    dupes = [f for f in excinfo.value.findings if f.rule_id == "duplicate-id"]
    assert {f.entity_id for f in dupes} == {"pct_failed_changes", "change_execution"}


def test_overlay_replaces_weights_and_bumps_version(table_catalog):
    overlay = WeightOverlay("db_resiliency", {
        "db_space_tickets": 0.4,
        "db_handler_tickets": 0.2,
        "db2_down_tickets": 0.2,
        "db_job_warning_tickets": 0.2,
    })
    updated = apply_weight_overlay(table_catalog, overlay)
    new_weights = {m.om_id: m.weight for m in updated.get_kpi("db_resiliency").mappings}
    assert new_weights == overlay.weights
    assert updated.version == table_catalog.version + 1
    # order of mapping entries is preserved
    assert [m.om_id for m in updated.get_kpi("db_resiliency").mappings] == [
        m.om_id for m in table_catalog.get_kpi("db_resiliency").mappings
    ]


def test_overlay_leaves_input_catalog_untouched(table_catalog):
    before = serialize_catalog(table_catalog)
    apply_weight_overlay(table_catalog, WeightOverlay("db_resiliency", {
        "db_space_tickets": 0.4,
        "db_handler_tickets": 0.2,
        "db2_down_tickets": 0.2,
        "db_job_warning_tickets": 0.2,
    }))
    assert serialize_catalog(table_catalog) == before


def test_identity_overlay_is_score_equivalent(table_catalog):
    weights = {m.om_id: m.weight for m in table_catalog.get_kpi("db_resiliency").mappings}
    updated = apply_weight_overlay(table_catalog, WeightOverlay("db_resiliency", weights))
    base = json.loads(serialize_catalog(table_catalog))
    new = json.loads(serialize_catalog(updated))
    base.pop("version"), new.pop("version")
    assert base == new


def test_overlay_key_mismatch(table_catalog):
    with pytest.raises(ValidationError, match="overlay keys"):
        apply_weight_overlay(table_catalog, WeightOverlay("db_resiliency", {
            "db_space_tickets": 0.5,
            "db_handler_tickets": 0.5,
        }))


def test_overlay_unknown_kpi(table_catalog):
    with pytest.raises(UnknownKpiError):
        apply_weight_overlay(table_catalog, WeightOverlay("nope", {"x": 1.0}))


def test_overlay_bad_weight_sum(table_catalog):
    with pytest.raises(ValidationError) as excinfo:
        apply_weight_overlay(table_catalog, WeightOverlay("db_resiliency", {
            "db_space_tickets": 0.4,
            "db_handler_tickets": 0.4,
            "db2_down_tickets": 0.4,
            "db_job_warning_tickets": 0.4,
        }))
    assert any(f.rule_id == "weight-sum" for f in excinfo.value.findings)


def test_overlay_rejects_zero_weight(table_catalog):
    with pytest.raises(ValidationError) as excinfo:
        apply_weight_overlay(table_catalog, WeightOverlay("db_resiliency", {
            "db_space_tickets": 1.0,
            "db_handler_tickets": 0.0,
            "db2_down_tickets": 0.0,
            "db_job_warning_tickets": 0.0,
        }))
    assert any(f.rule_id == "weight-range" for f in excinfo.value.findings)


def test_round_trip_table_catalog(table_catalog):
    assert load_catalog(serialize_catalog(table_catalog)) == table_catalog


def test_round_trip_demo_catalog():
    from tests.conftest import DEMO_DIR

    catalog = load_catalog((DEMO_DIR / "catalog.json").read_text())
    assert load_catalog(serialize_catalog(catalog)) == catalog


def _random_valid_doc(rng: random.Random) -> dict:
    n_oms = rng.randint(1, 6)
    oms = []
    for i in range(n_oms):
        lo = rng.uniform(-50, 50)
        oms.append({
            "om_id": f"om{i}",
            "description": "",
            "scale_type": "configured",
            "direction": rng.choice(["min", "max"]),
            "unit": "count",
            "lower_bound": lo,
            "upper_bound": lo + rng.uniform(1, 100),
            "aggregation": {
                "rule_id": f"om{i}",
                "kind": "count",
                "record_type": "incident",
                "numerator_predicate": [],
            },
        })
    kpis = []
    for j in range(rng.randint(1, 3)):
        size = rng.randint(1, n_oms)
        ids = rng.sample(range(n_oms), size)
        raw = [rng.uniform(0.05, 1.0) for _ in ids]
        total = sum(raw)
        kpis.append({
            "kpi_id": f"kpi{j}",
            "name": f"kpi{j}",
            "hierarchy_path": ["Topic"],
            "mappings": [
                {"om_id": f"om{i}", "weight": w / total} for i, w in zip(ids, raw)
            ],
        })
    return {"oms": oms, "kpis": kpis}


def test_loaded_catalogs_always_have_unit_weight_sums():
    rng = random.Random(7)
    for _ in range(50):
        catalog = load_catalog(json.dumps(_random_valid_doc(rng)))
        for kpi in catalog.kpis:
            assert abs(sum(m.weight for m in kpi.mappings) - 1.0) <= 1e-9
        # and round-trips exactly
        assert load_catalog(serialize_catalog(catalog)) == catalog


def test_get_kpi_unknown_raises():
    with pytest.raises(UnknownKpiError):
        Catalog(oms=[], kpis=[]).get_kpi("missing")
