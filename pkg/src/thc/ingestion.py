"""Raw operational record ingestion and aggregation.

Records arrive as per-type CSV files (``account_id,timestamp,<attributes>``)
from the five management domains. Declarative aggregation rules condense
them into one observation per (metric, account, month). A missing value is
an explicit state (``None``), never a silent zero.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

from .periods import period_of

if TYPE_CHECKING:
    from .catalog import Catalog

logger = logging.getLogger(__name__)

Scalar = str | int | float | bool


class RecordType(str, Enum):
    ASSET = "asset"
    CHANGE = "change"
    INCIDENT = "incident"
    EVENT = "event"
    COMPLIANCE = "compliance"


class AggregationKind(str, Enum):
    RATIO = "ratio"
    COUNT = "count"
    LATEST = "latest"


class PredicateOp(str, Enum):
    EQ = "eq"
    NE = "ne"
    LT = "lt"
    LE = "le"
    GT = "gt"
    GE = "ge"
    CONTAINS = "contains"


_ORDERING_OPS = {PredicateOp.LT, PredicateOp.LE, PredicateOp.GT, PredicateOp.GE}


class FormatError(Exception):
    """Raised when a CSV file's header or overall shape is unusable."""


@dataclass
class PredicateClause:
    field: str
    op: PredicateOp
    value: Scalar


@dataclass
class Predicate:
    """Conjunction of clauses; an empty clause list matches every record."""

    clauses: list[PredicateClause] = field(default_factory=list)

    def matches(self, attributes: dict[str, Scalar]) -> bool:
        return all(_clause_matches(c, attributes) for c in self.clauses)


def _as_number(value: Scalar) -> float | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


def _clause_matches(clause: PredicateClause, attributes: dict[str, Scalar]) -> bool:
    # A predicate referencing an absent attribute evaluates false.
    if clause.field not in attributes:
        return False
    attr = attributes[clause.field]
    if clause.op is PredicateOp.CONTAINS:
        return str(clause.value) in str(attr)
    if clause.op in _ORDERING_OPS:
        left, right = _as_number(attr), _as_number(clause.value)
        if left is None or right is None:
            return False
        if clause.op is PredicateOp.LT:
            return left < right
        if clause.op is PredicateOp.LE:
            return left <= right
        if clause.op is PredicateOp.GT:
            return left > right
        return left >= right
    # eq / ne: numeric comparison when the rule value is numeric,
    # string comparison otherwise.
    rule_num = _as_number(clause.value) if not isinstance(clause.value, str) else None
    if isinstance(clause.value, str):
        equal = str(attr) == clause.value
    elif rule_num is not None:
        attr_num = _as_number(attr)
        equal = attr_num is not None and attr_num == rule_num
    else:
        equal = attr == clause.value
    return equal if clause.op is PredicateOp.EQ else not equal


@dataclass
class AggregationRule:
    """How raw records of one type collapse into a monthly metric value.

    ratio  -> scale * |numerator matches| / |denominator matches|
    count  -> |numerator matches|
    latest -> numeric ``attribute`` of the most recent record in the month
    """

    rule_id: str
    kind: AggregationKind
    record_type: RecordType
    numerator_predicate: Predicate | None = None
    denominator_predicate: Predicate | None = None
    scale: float = 100.0
    attribute: str | None = None


@dataclass
class OperationalRecord:
    record_type: RecordType
    account_id: str
    timestamp: datetime
    attributes: dict[str, Scalar]

    @property
    def period(self) -> str:
        return period_of(self.timestamp)


@dataclass
class OmObservation:
    om_id: str
    account_id: str
    period: str
    actual_value: float | None


@dataclass
class RowError:
    line: int
    message: str


@dataclass
class ParseResult:
    records: list[OperationalRecord]
    errors: list[RowError]


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 instant with offset; rejects naive timestamps."""
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValueError(f"unparseable timestamp {raw!r}") from exc
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp {raw!r} has no UTC offset")
    return parsed


def parse_records(content: str, record_type: RecordType) -> ParseResult:
    """Parse one record-type CSV; malformed rows are collected, not fatal."""
    reader = csv.reader(io.StringIO(content))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty file, header row required") from None
    header = [h.strip() for h in header]
    for required in ("account_id", "timestamp"):
        if required not in header:
            raise FormatError(f"header missing required column {required!r}")
    if len(set(header)) != len(header):
        raise FormatError("duplicate column names in header")

    account_col = header.index("account_id")
    timestamp_col = header.index("timestamp")
    attribute_cols = [
        (i, name)
        for i, name in enumerate(header)
        if i not in (account_col, timestamp_col)
    ]

    records: list[OperationalRecord] = []
    errors: list[RowError] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            errors.append(RowError(line_no, f"expected {len(header)} columns, got {len(row)}"))
            continue
        account_id = row[account_col].strip()
        if not account_id:
            errors.append(RowError(line_no, "empty account_id"))
            continue
        try:
            timestamp = parse_timestamp(row[timestamp_col])
        except ValueError as exc:
            errors.append(RowError(line_no, str(exc)))
            continue
        attributes: dict[str, Scalar] = {
            name: row[i].strip() for i, name in attribute_cols if row[i].strip()
        }
        records.append(OperationalRecord(record_type, account_id, timestamp, attributes))
    return ParseResult(records, errors)


def _in_scope(
    record: OperationalRecord, rule: AggregationRule, account_id: str, period: str
) -> bool:
    return (
        record.record_type is rule.record_type
        and record.account_id == account_id
        and record.period == period
    )


def aggregate(
    records: Iterable[OperationalRecord],
    rule: AggregationRule,
    account_id: str,
    period: str,
    *,
    om_id: str | None = None,
) -> OmObservation:
    """Collapse matching records into one monthly observation.

    No records in scope, or a zero ratio denominator, yields a missing
    value. ``om_id`` defaults to the rule id.
    """
    om_id = om_id if om_id is not None else rule.rule_id
    in_scope = [r for r in records if _in_scope(r, rule, account_id, period)]
    if not in_scope:
        return OmObservation(om_id, account_id, period, None)

    if rule.kind is AggregationKind.RATIO:
        numerator = sum(1 for r in in_scope if rule.numerator_predicate.matches(r.attributes))
        denominator = sum(
            1 for r in in_scope if rule.denominator_predicate.matches(r.attributes)
        )
        if numerator > denominator:
            logger.warning(
                "rule %s: numerator count %d exceeds denominator count %d "
                "for account=%s period=%s",
                rule.rule_id, numerator, denominator, account_id, period,
            )
        if denominator == 0:
            return OmObservation(om_id, account_id, period, None)
        return OmObservation(om_id, account_id, period, rule.scale * numerator / denominator)

    if rule.kind is AggregationKind.COUNT:
        count = sum(1 for r in in_scope if rule.numerator_predicate.matches(r.attributes))
        return OmObservation(om_id, account_id, period, float(count))

    # latest: most recent timestamp wins; ties broken by last input position
    latest = max(enumerate(in_scope), key=lambda pair: (pair[1].timestamp, pair[0]))[1]
    value = _as_number(latest.attributes.get(rule.attribute, ""))
    return OmObservation(om_id, account_id, period, value)


def build_observation_matrix(
    records: Sequence[OperationalRecord],
    catalog: "Catalog",
    periods: Sequence[str],
) -> list[OmObservation]:
    """One observation per (metric, account, month); accounts come from the data.

    Output cardinality is exactly |metrics| * |accounts| * |months|, sorted
    by (om_id, account_id, period).
    """
    accounts = sorted({r.account_id for r in records})
    observations = [
        aggregate(records, om.aggregation, account, period, om_id=om.om_id)
        for om in sorted(catalog.oms, key=lambda o: o.om_id)
        for account in accounts
        for period in periods
    ]
    return observations
