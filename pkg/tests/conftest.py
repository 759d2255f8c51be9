from __future__ import annotations

import copy
import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from thc.catalog import load_catalog
from thc.snapshot import SnapshotStore, run_pipeline

DEMO_DIR = Path(__file__).parent.parent / "demo"

# One KPI mapping four ticket-count metrics at 0.25 each, alongside a
# configured percentage metric and a captured one.
TABLE_CATALOG = {
    "version": 1,
    "oms": [
        {
            "om_id": "pct_failed_changes",
            "description": "% of failed changes",
            "scale_type": "configured",
            "direction": "min",
            "unit": "percent",
            "lower_bound": 0,
            "upper_bound": 100,
            "aggregation": {
                "rule_id": "pct_failed_changes",
                "kind": "ratio",
                "record_type": "change",
                "numerator_predicate": [{"field": "status", "op": "eq", "value": "failed"}],
                "denominator_predicate": [],
            },
        },
        {
            "om_id": "server_change_failure_rate",
            "description": "failure rate for server-related changes",
            "scale_type": "captured",
            "direction": "min",
            "unit": "percent",
            "aggregation": {
                "rule_id": "server_change_failure_rate",
                "kind": "ratio",
                "record_type": "change",
                "numerator_predicate": [
                    {"field": "category", "op": "contains", "value": "server"},
                    {"field": "status", "op": "eq", "value": "failed"},
                ],
                "denominator_predicate": [
                    {"field": "category", "op": "contains", "value": "server"}
                ],
            },
        },
        {
            "om_id": "db_space_tickets",
            "description": "database space issue tickets",
            "scale_type": "configured",
            "direction": "min",
            "unit": "count",
            "lower_bound": 0,
            "upper_bound": 40,
            "aggregation": {
                "rule_id": "db_space_tickets",
                "kind": "count",
                "record_type": "incident",
                "numerator_predicate": [
                    {"field": "summary", "op": "contains", "value": "Database Space Issue"}
                ],
            },
        },
        {
            "om_id": "db_handler_tickets",
            "description": "database handler tickets",
            "scale_type": "configured",
            "direction": "min",
            "unit": "count",
            "lower_bound": 0,
            "upper_bound": 40,
            "aggregation": {
                "rule_id": "db_handler_tickets",
                "kind": "count",
                "record_type": "incident",
                "numerator_predicate": [
                    {"field": "summary", "op": "contains", "value": "Database Handler"}
                ],
            },
        },
        {
            "om_id": "db2_down_tickets",
            "description": "DB2 instance down tickets",
            "scale_type": "configured",
            "direction": "min",
            "unit": "count",
            "lower_bound": 0,
            "upper_bound": 40,
            "aggregation": {
                "rule_id": "db2_down_tickets",
                "kind": "count",
                "record_type": "incident",
                "numerator_predicate": [
                    {"field": "summary", "op": "contains", "value": "DB2 Instance Down"}
                ],
            },
        },
        {
            "om_id": "db_job_warning_tickets",
            "description": "database job warning tickets",
            "scale_type": "configured",
            "direction": "min",
            "unit": "count",
            "lower_bound": 0,
            "upper_bound": 40,
            "aggregation": {
                "rule_id": "db_job_warning_tickets",
                "kind": "count",
                "record_type": "incident",
                "numerator_predicate": [
                    {"field": "summary", "op": "contains", "value": "Database Job Warning"}
                ],
            },
        },
    ],
    "kpis": [
        {
            "kpi_id": "db_resiliency",
            "name": "Database Resiliency Management",
            "hierarchy_path": ["Technology", "Database"],
            "mappings": [
                {"om_id": "db_space_tickets", "weight": 0.25},
                {"om_id": "db_handler_tickets", "weight": 0.25},
                {"om_id": "db2_down_tickets", "weight": 0.25},
                {"om_id": "db_job_warning_tickets", "weight": 0.25},
            ],
        },
        {
            "kpi_id": "change_execution",
            "name": "Change Execution Quality",
            "hierarchy_path": ["Operational Processes", "Change Management"],
            "mappings": [
                {"om_id": "pct_failed_changes", "weight": 0.7},
                {"om_id": "server_change_failure_rate", "weight": 0.3},
            ],
        },
    ],
}


@pytest.fixture
def table_catalog_doc() -> dict:
    return copy.deepcopy(TABLE_CATALOG)


@pytest.fixture
def table_catalog(table_catalog_doc):
    return load_catalog(json.dumps(table_catalog_doc))


@pytest.fixture(scope="session")
def demo_snapshot():
    return run_pipeline(DEMO_DIR / "data", DEMO_DIR / "catalog.json")


@pytest.fixture(scope="session")
def demo_store(demo_snapshot):
    return SnapshotStore(demo_snapshot)


@pytest.fixture(scope="session")
def api_client(demo_store):
    from fastapi.testclient import TestClient

    from thc.api import create_app

    with TestClient(create_app(demo_store)) as client:
        yield client
