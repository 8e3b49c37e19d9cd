"""Hourly electricity price series, the US federal work calendar, and smoothing."""

from __future__ import annotations

import csv
import datetime as dt
import io
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from pandas.tseries.holiday import USFederalHolidayCalendar
from scipy.signal import savgol_filter

from .errors import (
    DateOutOfRange,
    DuplicateTimestamp,
    EmptyInput,
    InvalidWindow,
    MalformedRow,
    MissingHours,
    PriceSeriesTooShort,
    QOutOfRange,
)

log = logging.getLogger(__name__)

HEADER = ("timestamp", "price_usd_per_kwh")
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%S"
HOUR = dt.timedelta(hours=1)


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Contiguous hourly prices in $/kWh, starting at midnight of ``start``.

    Index ``i`` is the hour beginning at ``start + i hours``. Prices may be
    negative. The array is made read-only so series can be shared freely.
    """

    city_id: str
    start: dt.date
    prices: np.ndarray
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        arr = np.array(self.prices, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("prices must be a non-empty 1-D sequence")
        if arr.size % 24:
            raise ValueError(f"length {arr.size} is not a whole number of days")
        if not np.all(np.isfinite(arr)):
            raise ValueError("prices must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "prices", arr)

    step = HOUR

    def __len__(self) -> int:
        return self.prices.size

    @property
    def n_days(self) -> int:
        return self.prices.size // 24

    def timestamp(self, i: int) -> dt.datetime:
        return dt.datetime.combine(self.start, dt.time()) + i * HOUR

    def year_prices(self, year: int) -> np.ndarray:
        """Prices for every hour of calendar ``year``."""
        first = (dt.date(year, 1, 1) - self.start).days
        n_days = (dt.date(year + 1, 1, 1) - dt.date(year, 1, 1)).days
        if first < 0 or first + n_days > self.n_days:
            raise PriceSeriesTooShort(
                f"series {self.city_id!r} ({self.start}, {self.n_days} days) "
                f"does not cover {year}"
            )
        return self.prices[first * 24:(first + n_days) * 24]


def _second_sunday_march(year: int) -> dt.date:
    d = dt.date(year, 3, 8)
    return d + dt.timedelta(days=(6 - d.weekday()) % 7)


def _first_sunday_november(year: int) -> dt.date:
    d = dt.date(year, 11, 1)
    return d + dt.timedelta(days=(6 - d.weekday()) % 7)


def _is_spring_forward_gap(missing: dt.datetime) -> bool:
    return missing.hour == 2 and missing.date() == _second_sunday_march(missing.year)


def _is_fall_back_repeat(ts: dt.datetime) -> bool:
    return ts.hour == 1 and ts.date() == _first_sunday_november(ts.year)


def parse_price_csv(content: bytes | str, city_id: str) -> PriceSeries:
    """Parse a ``timestamp,price_usd_per_kwh`` export into a PriceSeries.

    Timestamps are local wall-clock times at the top of each hour. The one
    repeated hour at the autumn DST change is averaged and the one skipped hour
    at the spring change is linearly interpolated; both are recorded in
    ``PriceSeries.notes``. Any other gap or repeat is an error.
    """
    if isinstance(content, bytes):
        try:
            content = content.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedRow(1, f"not valid UTF-8 ({exc})") from None
    if not content.strip():
        raise EmptyInput("price file is empty")

    reader = csv.reader(io.StringIO(content))
    header = next(reader)
    if tuple(h.strip() for h in header) != HEADER:
        raise MalformedRow(1, f"expected header {','.join(HEADER)!r}, got {','.join(header)!r}")

    stamps: list[dt.datetime] = []
    values: list[float] = []
    notes: list[str] = []
    for row_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise MalformedRow(row_no, f"expected 2 fields, got {len(row)}")
        try:
            ts = dt.datetime.fromisoformat(row[0].strip())
        except ValueError:
            raise MalformedRow(row_no, f"bad timestamp {row[0]!r}") from None
        ts = ts.replace(tzinfo=None)
        if ts.minute or ts.second or ts.microsecond:
            raise MalformedRow(row_no, f"timestamp {row[0]!r} is not at the top of an hour")
        try:
            price = float(row[1])
        except ValueError:
            raise MalformedRow(row_no, f"bad price {row[1]!r}") from None
        if not np.isfinite(price):
            raise MalformedRow(row_no, f"non-finite price {row[1]!r}")

        if stamps:
            delta = ts - stamps[-1]
            if delta == HOUR:
                pass
            elif delta == dt.timedelta(0):
                if not _is_fall_back_repeat(ts) or (len(stamps) > 1 and stamps[-2] == ts):
                    raise DuplicateTimestamp(ts)
                values[-1] = 0.5 * (values[-1] + price)
                notes.append(f"averaged repeated DST hour {ts:{TIMESTAMP_FORMAT}}")
                stamps.append(ts)  # marker so a third repeat is caught
                continue
            elif delta == 2 * HOUR and _is_spring_forward_gap(ts - HOUR):
                stamps.append(ts - HOUR)
                values.append(0.5 * (values[-1] + price))
                notes.append(f"interpolated skipped DST hour {ts - HOUR:{TIMESTAMP_FORMAT}}")
            elif delta < dt.timedelta(0):
                raise MalformedRow(row_no, "timestamps are not ascending")
            else:
                raise MissingHours(stamps[-1], ts)
        elif ts.hour != 0:
            raise MissingHours(dt.datetime.combine(ts.date(), dt.time()), ts)
        stamps.append(ts)
        values.append(price)

    if not values:
        raise EmptyInput("price file has a header but no rows")
    # Drop the repeat markers: one entry per distinct hour.
    hours = sorted(set(stamps))
    if len(hours) % 24:
        last = hours[-1]
        raise MissingHours(last, dt.datetime.combine(last.date() + dt.timedelta(days=1), dt.time()))
    for note in notes:
        log.warning("%s: %s", city_id, note)
    return PriceSeries(city_id, hours[0].date(), np.asarray(values), tuple(notes))


def format_price_csv(series: PriceSeries) -> bytes:
    """Serialize to the canonical CSV form (LF endings, shortest-repr prices)."""
    base = dt.datetime.combine(series.start, dt.time())
    lines = [",".join(HEADER)]
    for i, p in enumerate(series.prices.tolist()):
        lines.append(f"{base + i * HOUR:{TIMESTAMP_FORMAT}},{p!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def smooth_prices(series: PriceSeries, window: int, poly_order: int,
                  mode: str = "interp") -> PriceSeries:
    """Savitzky-Golay smoothing for reporting.

    Each output point is the value at its own position of the least-squares
    polynomial of degree ``poly_order`` fitted over a centred window of
    ``window`` hours. Near the ends, ``mode="interp"`` evaluates the polynomial
    fitted to the first/last full window, which keeps the filter exact on
    polynomials; ``mode="mirror"`` reflects the series about its end points.
    """
    n = len(series)
    if not isinstance(window, (int, np.integer)) or window % 2 == 0:
        raise InvalidWindow(f"window must be an odd integer, got {window!r}")
    if not 0 <= poly_order < window:
        raise InvalidWindow(f"need window > poly_order >= 0, got {window}, {poly_order}")
    if window > n:
        raise InvalidWindow(f"window {window} exceeds series length {n}")
    if mode not in ("interp", "mirror"):
        raise ValueError(f"unknown edge mode {mode!r}")
    out = savgol_filter(series.prices, window, poly_order, mode=mode)
    return PriceSeries(series.city_id, series.start, out, series.notes)


def price_percentile(series: PriceSeries, q: float) -> float:
    """q-quantile of the prices with linear interpolation between order statistics."""
    if not 0.0 <= q <= 1.0:
        raise QOutOfRange(f"q must lie in [0, 1], got {q!r}")
    return float(np.quantile(series.prices, q, method="linear"))


@dataclass(frozen=True)
class WorkCalendar:
    """Working days of one year: weekdays minus observed federal holidays."""

    year: int
    holidays: frozenset[dt.date]

    def __post_init__(self):
        stray = [d for d in self.holidays if d.year != self.year]
        if stray:
            raise ValueError(f"holidays outside {self.year}: {sorted(stray)}")

    @classmethod
    def us_federal(cls, year: int) -> "WorkCalendar":
        days = USFederalHolidayCalendar().holidays(f"{year}-01-01", f"{year}-12-31")
        return cls(year, frozenset(d.date() for d in days))

    @property
    def days(self) -> list[dt.date]:
        first = dt.date(self.year, 1, 1)
        n = (dt.date(self.year + 1, 1, 1) - first).days
        return [first + dt.timedelta(days=i) for i in range(n)]

    def working_days(self) -> list[dt.date]:
        return [d for d in self.days if is_working_day(self, d)]


def is_working_day(calendar: WorkCalendar, date: dt.date) -> bool:
    if date.year != calendar.year:
        raise DateOutOfRange(f"{date} is outside calendar year {calendar.year}")
    return date.weekday() < 5 and date not in calendar.holidays


def working_day_mask(calendar: WorkCalendar) -> np.ndarray:
    """Boolean array over the days of the year."""
    return np.array([is_working_day(calendar, d) for d in calendar.days])


def series_from_values(city_id: str, start: dt.date, values: Sequence[float]) -> PriceSeries:
    return PriceSeries(city_id, start, np.asarray(values, dtype=float))
