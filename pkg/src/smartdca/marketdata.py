"""Price series ingestion, validation, synthesis and buy schedules.

A PriceSeries is an immutable, strictly increasing sequence of
(timestamp, price) points with positive finite prices. Timestamps are
either all calendar dates or all integer ticks; the two axes never mix.

CSV is the only ingestion format: UTF-8, header ``date,price`` or
``tick,price``, one record per line, ISO-8601 dates or integer ticks,
decimal price literals. The writer emits the same format with full
round-trip precision, so load_csv(write_csv(s)) == s exactly.

Synthetic series come from a seeded numpy PCG64 generator; the algorithm
name is exported as RNG_ALGORITHM and recorded in report metadata so runs
are reproducible.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from datetime import date, timedelta
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DataError, DomainError

RNG_ALGORITHM = "numpy-pcg64"

# Uniform price generator floor: keeps "prices near zero" scenarios finite
# so unbounded strategies blow up visibly instead of dividing by zero.
PRICE_FLOOR = 1e-6

_HEADERS = {("date", "price"): "date", ("tick", "price"): "tick"}


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Ordered, validated (timestamp, price) points. Immutable and shareable."""

    timestamps: tuple
    prices: np.ndarray

    def __post_init__(self):
        ts = tuple(self.timestamps)
        p = np.asarray(self.prices, dtype=float)
        if p.ndim != 1 or len(ts) != p.size or p.size < 1:
            raise DomainError("series needs matching, non-empty timestamp and price sequences")
        if not np.all(np.isfinite(p)):
            raise DomainError("series prices must be finite")
        if np.any(p <= 0.0):
            raise DomainError(f"series prices must be > 0, got {float(p[p <= 0.0][0])}")
        dated = isinstance(ts[0], date)
        for t in ts:
            if isinstance(t, date) != dated:
                raise DomainError("series timestamps must be all dates or all integer ticks")
        for a, b in zip(ts, ts[1:]):
            if not a < b:
                raise DomainError(f"series timestamps must be strictly increasing, got {a!r} then {b!r}")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", p)

    def __len__(self) -> int:
        return len(self.timestamps)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return self.timestamps == other.timestamps and np.array_equal(self.prices, other.prices)

    @property
    def is_dated(self) -> bool:
        return isinstance(self.timestamps[0], date)

    @property
    def first_price(self) -> float:
        return float(self.prices[0])

    @property
    def last_price(self) -> float:
        return float(self.prices[-1])

    def slice_range(self, start: int, stop: int) -> "PriceSeries":
        if not (0 <= start < stop <= len(self)):
            raise DomainError(f"invalid slice [{start}:{stop}] for series of length {len(self)}")
        return PriceSeries(self.timestamps[start:stop], self.prices[start:stop])


@dataclass(frozen=True)
class BuySchedule:
    """Strictly increasing indices into a series at which buys occur."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) == 0:
            raise DomainError("schedule must contain at least one index")
        if any(i < 0 for i in idx):
            raise DomainError("schedule indices must be non-negative")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise DomainError("schedule indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)


def schedule_every(series: PriceSeries, k: int) -> BuySchedule:
    """Buy at indices 0, k, 2k, ... A k longer than the series buys once, at 0."""
    if int(k) != k or k < 1:
        raise DomainError(f"schedule stride must be a positive integer, got {k}")
    return BuySchedule(tuple(range(0, len(series), int(k))))


def full_schedule(series: PriceSeries) -> BuySchedule:
    return schedule_every(series, 1)


def load_csv(path, column_spec: tuple[str, str] | None = None) -> PriceSeries:
    """Load and validate a series; errors name the offending 1-based row."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"price file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = tuple(h.strip() for h in header)
        if column_spec is not None:
            ts_col, price_col = column_spec
            if ts_col not in header or price_col not in header:
                raise DataError(f"{path}: row 1: missing column {ts_col!r} or {price_col!r} in header {header}")
            ts_pos, price_pos = header.index(ts_col), header.index(price_col)
            axis = "date" if ts_col == "date" else "tick"
        elif header in _HEADERS:
            ts_pos, price_pos = 0, 1
            axis = _HEADERS[header]
        else:
            raise DataError(f"{path}: row 1: expected header 'date,price' or 'tick,price', got {','.join(header)}")

        timestamps, prices = [], []
        prev = None
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) <= max(ts_pos, price_pos):
                raise DataError(f"{path}: row {row_no}: expected {max(ts_pos, price_pos) + 1} columns, got {len(row)}")
            raw_ts = row[ts_pos].strip()
            raw_price = row[price_pos].strip()
            if axis == "date":
                try:
                    ts = date.fromisoformat(raw_ts)
                except ValueError:
                    raise DataError(f"{path}: row {row_no}: invalid ISO date {raw_ts!r}") from None
            else:
                try:
                    ts = int(raw_ts)
                except ValueError:
                    raise DataError(f"{path}: row {row_no}: invalid integer tick {raw_ts!r}") from None
            try:
                price = float(raw_price)
            except ValueError:
                raise DataError(f"{path}: row {row_no}: non-numeric price {raw_price!r}") from None
            if not np.isfinite(price):
                raise DataError(f"{path}: row {row_no}: non-finite price {raw_price!r}")
            if price <= 0.0:
                raise DataError(f"{path}: row {row_no}: non-positive price {price}")
            if prev is not None:
                if ts == prev:
                    raise DataError(f"{path}: row {row_no}: duplicate timestamp {raw_ts}")
                if ts < prev:
                    raise DataError(f"{path}: row {row_no}: timestamps out of order ({raw_ts} after {prev})")
            prev = ts
            timestamps.append(ts)
            prices.append(price)
    if not timestamps:
        raise DataError(f"{path}: no data rows")
    return PriceSeries(tuple(timestamps), np.asarray(prices))


def write_csv(series: PriceSeries, path) -> Path:
    """Write the exact round-trip format (repr floats parse back equal)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date" if series.is_dated else "tick", "price"])
        for ts, price in zip(series.timestamps, series.prices):
            writer.writerow([ts.isoformat() if series.is_dated else ts, repr(float(price))])
    return path


def synth_uniform(n: int, lo: float, hi: float, seed: int) -> PriceSeries:
    """n prices uniform on (max(lo, 1e-6), hi), integer ticks 1..n, seeded."""
    if int(n) != n or n < 1:
        raise DomainError(f"sample count must be a positive integer, got {n}")
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo < 0 or not lo < hi:
        raise DomainError(f"uniform bounds must satisfy 0 <= lo < hi, got lo={lo}, hi={hi}")
    low = max(float(lo), PRICE_FLOOR)
    if not low < hi:
        raise DomainError(f"price floor {PRICE_FLOOR} leaves an empty range (lo={lo}, hi={hi})")
    rng = np.random.default_rng(int(seed))
    prices = rng.uniform(low, hi, int(n))
    return PriceSeries(tuple(range(1, int(n) + 1)), prices)


# ---------------------------------------------------------------------------
# Durations and calendar windows

_DURATION_RE = re.compile(r"^(\d+)\s*([dmyt])$")

TICKS_PER_YEAR = 365


def parse_duration(value, dated: bool) -> tuple[str, int]:
    """Parse a window/step length into (unit, count).

    Accepts "Nd" (days), "Nm" (months), "Ny" (years), "Nt" (ticks), or a
    bare integer meaning days on a dated axis and ticks on a tick axis.
    """
    if isinstance(value, int) and not isinstance(value, bool):
        unit = "d" if dated else "t"
        count = value
    else:
        m = _DURATION_RE.match(str(value).strip().lower())
        if not m:
            raise DomainError(f"cannot parse duration {value!r}; use e.g. 365, '30d', '6m', '1y', '90t'")
        count, unit = int(m.group(1)), m.group(2)
    if count < 1:
        raise DomainError(f"duration must be at least 1, got {value!r}")
    if dated and unit == "t":
        raise DomainError("tick durations are not valid on a dated series")
    if not dated and unit != "t":
        raise DomainError("only tick durations ('Nt' or integers) are valid on a tick series")
    return unit, count


def _add_months(d: date, months: int) -> date:
    y, m = divmod(d.month - 1 + months, 12)
    year, month = d.year + y, m + 1
    # clamp to the target month's last day
    for day in (d.day, 30, 29, 28):
        try:
            return date(year, month, day)
        except ValueError:
            continue
    raise AssertionError("unreachable")


def advance(ts, duration: tuple[str, int]):
    unit, count = duration
    if unit == "t":
        return ts + count
    if unit == "d":
        return ts + timedelta(days=count)
    if unit == "m":
        return _add_months(ts, count)
    if unit == "y":
        return _add_months(ts, 12 * count)
    raise DomainError(f"unknown duration unit {unit!r}")


def iter_windows(series: PriceSeries, window_len, step):
    """Yield (start_ts, end_ts, start_idx, stop_idx) half-open windows.

    Windows start at the first timestamp and advance by ``step``; each
    covers [start, start + window_len). Raises if a single window would not
    fit inside the series; empty trailing windows are skipped.
    """
    dated = series.is_dated
    wlen = parse_duration(window_len, dated)
    wstep = parse_duration(step, dated)
    ts = series.timestamps
    one = ("d", 1) if dated else ("t", 1)
    if advance(ts[0], wlen) > advance(ts[-1], one):
        raise DomainError(f"window {window_len!r} is longer than the series span")
    start = ts[0]
    start_idx = 0
    while start <= ts[-1]:
        end = advance(start, wlen)
        while start_idx < len(ts) and ts[start_idx] < start:
            start_idx += 1
        stop_idx = start_idx
        while stop_idx < len(ts) and ts[stop_idx] < end:
            stop_idx += 1
        if stop_idx > start_idx:
            yield start, end, start_idx, stop_idx
        start = advance(start, wstep)


def calendar_year_groups(series: PriceSeries) -> list[tuple[str, int, int]]:
    """Split a series into (label, start_idx, stop_idx) yearly groups.

    Dated series split on calendar years; tick series fall back to
    consecutive chunks of TICKS_PER_YEAR ticks.
    """
    groups: list[tuple[str, int, int]] = []
    if series.is_dated:
        start = 0
        for i in range(1, len(series) + 1):
            if i == len(series) or series.timestamps[i].year != series.timestamps[start].year:
                groups.append((str(series.timestamps[start].year), start, i))
                start = i
    else:
        first = series.timestamps[0]
        start = 0
        for i in range(1, len(series) + 1):
            if i == len(series) or (series.timestamps[i] - first) // TICKS_PER_YEAR != (
                series.timestamps[start] - first
            ) // TICKS_PER_YEAR:
                groups.append(
                    (f"ticks_{series.timestamps[start]}_{series.timestamps[i - 1]}", start, i)
                )
                start = i
    return groups


def bundled_data_path(name: str) -> Path:
    """Path to a CSV shipped with the package (see smartdca/data)."""
    p = resources.files("smartdca").joinpath("data", name)
    with resources.as_file(p) as concrete:
        return Path(concrete)
