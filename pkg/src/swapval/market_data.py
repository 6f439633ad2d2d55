"""Hourly price series: CSV ingestion, validation, and synthetic generators.

A series holds aligned hourly energy (LMP) and reserve prices for one
representative stretch of whole days.  The lifecycle engine tiles the series
day-wise across the battery lifetime, so a single year (8760 rows) stands in
for every operating year.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

DEFAULT_SCHEMA = {
    "hour": "hour",
    "lmp": "lmp_usd_per_mwh",
    "reserve": "reserve_usd_per_mw",
}


class PriceDataError(ValueError):
    """Raised for malformed price files or invalid series content.

    ``row`` is the 1-based data row (header excluded) when the problem is
    attributable to a single row, else None.
    """

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


@dataclass
class HourlyPriceSeries:
    """Aligned hourly LMP and reserve prices covering whole days.

    Values are immutable by convention after construction; share freely
    across threads.  Hour indices are implicit: entry h is hour h, counted
    from 0, and the series length is a positive multiple of 24.
    """

    lmp: np.ndarray
    reserve_price: np.ndarray

    def __post_init__(self):
        self.lmp = np.asarray(self.lmp, dtype=float)
        self.reserve_price = np.asarray(self.reserve_price, dtype=float)
        validate_series(self)

    @property
    def n_hours(self) -> int:
        return len(self.lmp)

    @property
    def n_days(self) -> int:
        return len(self.lmp) // 24

    def day(self, day_index: int) -> tuple[np.ndarray, np.ndarray]:
        """24-hour (lmp, reserve) slice for a day, tiling the series day-wise.

        ``day_index`` may exceed the stored span; it wraps modulo ``n_days``
        so one representative year repeats over the battery lifetime.
        """
        d = day_index % self.n_days
        return (self.lmp[24 * d : 24 * (d + 1)], self.reserve_price[24 * d : 24 * (d + 1)])


def validate_series(series: HourlyPriceSeries) -> None:
    """Check the series invariants, raising PriceDataError on violation."""
    n = len(series.lmp)
    if n == 0 or n % 24 != 0:
        raise PriceDataError(f"series length {n} is not a positive multiple of 24")
    if len(series.reserve_price) != n:
        raise PriceDataError("lmp and reserve_price lengths differ")
    if not np.all(np.isfinite(series.lmp)):
        row = int(np.flatnonzero(~np.isfinite(series.lmp))[0]) + 1
        raise PriceDataError("non-finite lmp", row=row)
    if not np.all(np.isfinite(series.reserve_price)):
        row = int(np.flatnonzero(~np.isfinite(series.reserve_price))[0]) + 1
        raise PriceDataError("non-finite reserve price", row=row)
    if np.any(series.reserve_price < 0):
        row = int(np.flatnonzero(series.reserve_price < 0)[0]) + 1
        raise PriceDataError(
            f"negative reserve price {series.reserve_price[row - 1]}", row=row
        )


def _parse_number(cell: str, what: str, row: int) -> float:
    # Plain decimal notation only: no thousands separators, no underscores.
    text = cell.strip()
    if not text or "_" in text or "," in text:
        raise PriceDataError(f"non-numeric {what} {cell!r}", row=row)
    try:
        value = float(text)
    except ValueError:
        raise PriceDataError(f"non-numeric {what} {cell!r}", row=row) from None
    if not math.isfinite(value):
        raise PriceDataError(f"non-finite {what} {cell!r}", row=row)
    return value


def load_price_series(path: str | os.PathLike, schema: dict | None = None) -> HourlyPriceSeries:
    """Read and validate an hourly price CSV.

    Args:
        path: CSV file with a header row, one row per hour.
        schema: column-name map with keys 'hour', 'lmp' and optionally
            'reserve'.  Defaults to DEFAULT_SCHEMA.  If 'reserve' is absent
            or maps to None, reserve prices default to 0.

    Returns:
        A validated HourlyPriceSeries.

    Raises:
        PriceDataError: missing file, missing columns, duplicate/missing
            hours, non-numeric cells, negative reserve prices, or a row
            count that is not a multiple of 24.  Row numbers are 1-based
            data rows (header excluded).
    """
    schema = dict(DEFAULT_SCHEMA if schema is None else schema)
    hour_col = schema.get("hour")
    lmp_col = schema.get("lmp")
    reserve_col = schema.get("reserve")
    if not hour_col or not lmp_col:
        raise PriceDataError("schema must map 'hour' and 'lmp' columns")

    if not os.path.exists(path):
        raise PriceDataError(f"price file not found: {path}")

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise PriceDataError("empty file (no header row)")
        for col in filter(None, (hour_col, lmp_col, reserve_col)):
            if col not in reader.fieldnames:
                raise PriceDataError(f"missing column {col!r} (found {reader.fieldnames})")

        hours: list[int] = []
        lmp: list[float] = []
        reserve: list[float] = []
        for i, record in enumerate(reader, start=1):
            raw_hour = _parse_number(record[hour_col], "hour", i)
            if raw_hour != int(raw_hour):
                raise PriceDataError(f"non-integer hour {record[hour_col]!r}", row=i)
            hours.append(int(raw_hour))
            lmp.append(_parse_number(record[lmp_col], "lmp", i))
            if reserve_col is not None:
                r = _parse_number(record[reserve_col], "reserve price", i)
                if r < 0:
                    raise PriceDataError(f"negative reserve price {r}", row=i)
                reserve.append(r)
            else:
                reserve.append(0.0)

    n = len(hours)
    if n == 0 or n % 24 != 0:
        raise PriceDataError(f"row count {n} not a multiple of 24")
    for i, h in enumerate(hours, start=1):
        if h != i - 1:
            if h in hours[: i - 1]:
                raise PriceDataError(f"duplicate hour {h}", row=i)
            raise PriceDataError(f"hour {h} out of order (expected {i - 1})", row=i)

    return HourlyPriceSeries(lmp=np.array(lmp), reserve_price=np.array(reserve))


def write_series(series: HourlyPriceSeries, path: str | os.PathLike,
                 schema: dict | None = None) -> None:
    """Write a series as CSV, numerically exact on round-trip via repr floats."""
    schema = dict(DEFAULT_SCHEMA if schema is None else schema)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([schema["hour"], schema["lmp"], schema.get("reserve", "reserve_usd_per_mw")])
        for h in range(series.n_hours):
            writer.writerow([h, repr(float(series.lmp[h])), repr(float(series.reserve_price[h]))])


def synth_price_series(pattern: str, days: int, seed: int = 0,
                       reserve_level: float = 0.0, **params) -> HourlyPriceSeries:
    """Generate a deterministic synthetic price series.

    Patterns:
        'flat':       level
        'two-level':  low, high, split_hour (hours < split take low)
        'daily-sine': mean, amplitude; peak at hour 18, trough at hour 6,
                      with a seeded +/-10% per-day amplitude jitter so the
                      synthetic year is not 365 identical days.

    reserve_price is ``reserve_level`` (>= 0) for every hour.
    """
    if days < 1:
        raise PriceDataError(f"days must be >= 1, got {days}")
    if reserve_level < 0:
        raise PriceDataError(f"reserve_level must be >= 0, got {reserve_level}")
    n = 24 * days

    if pattern == "flat":
        level = float(params["level"])
        lmp = np.full(n, level)
    elif pattern == "two-level":
        low, high = float(params["low"]), float(params["high"])
        split = int(params.get("split_hour", 12))
        if not 0 <= split <= 24:
            raise PriceDataError(f"split_hour must be in [0, 24], got {split}")
        day = np.where(np.arange(24) < split, low, high)
        lmp = np.tile(day, days)
    elif pattern == "daily-sine":
        mean, amplitude = float(params["mean"]), float(params["amplitude"])
        if amplitude < 0:
            raise PriceDataError(f"amplitude must be >= 0, got {amplitude}")
        rng = np.random.default_rng(seed)
        jitter = rng.uniform(0.9, 1.1, size=days)
        hours = np.arange(24)
        shape = np.sin(2.0 * np.pi * (hours - 12.0) / 24.0)
        lmp = (mean + amplitude * np.outer(jitter, shape)).ravel()
    else:
        raise PriceDataError(f"unknown pattern {pattern!r}")

    return HourlyPriceSeries(lmp=lmp, reserve_price=np.full(n, float(reserve_level)))
