"""Day-granularity date helpers.

Every timestamp in the toolkit is a UTC calendar day, represented as
``datetime.date``.  Sub-day ordering is intentionally not representable.
"""

from __future__ import annotations

from datetime import date, datetime, timezone
from typing import Iterable

from .errors import DataFormatError

DayDate = date


def parse_day(text: str) -> date:
    """Parse a strict ISO-8601 calendar day (``YYYY-MM-DD``)."""
    try:
        return date.fromisoformat(text)
    except (TypeError, ValueError):
        raise DataFormatError(f"invalid calendar day {text!r} (expected YYYY-MM-DD)")


def today_utc() -> date:
    return datetime.now(timezone.utc).date()


def bounding_span(days: Iterable[date]) -> tuple[date, date] | None:
    """Smallest inclusive span covering ``days``, or None when empty."""
    first: date | None = None
    last: date | None = None
    for day in days:
        if first is None or day < first:
            first = day
        if last is None or day > last:
            last = day
    if first is None or last is None:
        return None
    return first, last
