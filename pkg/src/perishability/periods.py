"""Calendar month identifiers of the form "YYYY-MM" and arithmetic on them."""

from __future__ import annotations

import re
from datetime import datetime, timezone

_PERIOD_RE = re.compile(r"^(\d{4})-(\d{2})$")

MONTHS_PER_YEAR = 12


def period_of(timestamp: int) -> str:
    """Month id containing a unix timestamp (UTC)."""
    dt = datetime.fromtimestamp(timestamp, tz=timezone.utc)
    return f"{dt.year:04d}-{dt.month:02d}"


def month_index(period_id: str) -> int:
    """Months since year 0 for a "YYYY-MM" id."""
    m = _PERIOD_RE.match(period_id)
    if not m:
        raise ValueError(f"bad period id {period_id!r}, expected YYYY-MM")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise ValueError(f"bad month in period id {period_id!r}")
    return year * MONTHS_PER_YEAR + (month - 1)


def delta_years(later: str, earlier: str) -> float:
    """Signed gap in years between two month ids, counted in whole months."""
    return (month_index(later) - month_index(earlier)) / MONTHS_PER_YEAR


def month_range(start: str, count: int) -> list[str]:
    """`count` consecutive month ids beginning at `start`."""
    base = month_index(start)
    out = []
    for i in range(count):
        idx = base + i
        out.append(f"{idx // MONTHS_PER_YEAR:04d}-{idx % MONTHS_PER_YEAR + 1:02d}")
    return out


def mid_month_timestamp(period_id: str) -> int:
    """A timestamp safely inside the month (the 15th, midnight UTC)."""
    m = _PERIOD_RE.match(period_id)
    if not m:
        raise ValueError(f"bad period id {period_id!r}, expected YYYY-MM")
    dt = datetime(int(m.group(1)), int(m.group(2)), 15, tzinfo=timezone.utc)
    return int(dt.timestamp())
