"""Calendar-month period handling.

Periods are plain ``YYYY-MM`` strings throughout the engine. The string
form sorts chronologically, which the pipeline relies on.
"""

from __future__ import annotations

import re
from datetime import datetime, timezone

_PERIOD_RE = re.compile(r"^(\d{4})-(\d{2})$")


class PeriodError(ValueError):
    """Raised for strings that are not valid YYYY-MM periods."""


def parse_period(period: str) -> tuple[int, int]:
    """Return (year, month) for a YYYY-MM string."""
    m = _PERIOD_RE.match(period)
    if not m:
        raise PeriodError(f"invalid period {period!r}, expected YYYY-MM")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise PeriodError(f"invalid month in period {period!r}")
    return year, month


def format_period(year: int, month: int) -> str:
    return f"{year:04d}-{month:02d}"


def add_months(period: str, delta: int) -> str:
    year, month = parse_period(period)
    total = year * 12 + (month - 1) + delta
    return format_period(total // 12, total % 12 + 1)


def next_period(period: str) -> str:
    return add_months(period, 1)


def month_range(start: str, end: str) -> list[str]:
    """All months from start to end inclusive; empty when start > end."""
    sy, sm = parse_period(start)
    ey, em = parse_period(end)
    first = sy * 12 + (sm - 1)
    last = ey * 12 + (em - 1)
    return [format_period(t // 12, t % 12 + 1) for t in range(first, last + 1)]


def months_between(earlier: str, later: str) -> int:
    ey, em = parse_period(earlier)
    ly, lm = parse_period(later)
    return (ly * 12 + lm) - (ey * 12 + em)


def period_of(instant: datetime) -> str:
    """Calendar month (UTC) containing a timezone-aware instant."""
    if instant.tzinfo is None:
        raise PeriodError("naive timestamps have no well-defined UTC month")
    utc = instant.astimezone(timezone.utc)
    return format_period(utc.year, utc.month)
