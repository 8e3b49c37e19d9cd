"""Deterministic synthetic inputs in the bundled file schemas.

The shipped data files under ``v2gsim/data`` are produced by :func:`write_bundle`
(``python -m v2gsim.synthetic DIR``). None of them is survey or market data:
shapes are chosen to resemble household-travel and labour-survey marginals and
hourly wholesale prices, with magnitudes set by hand.
"""

from __future__ import annotations

import datetime as dt
import sys
from pathlib import Path

import numpy as np

from .population import ARRIVAL_HEADER, CATALOG_HEADER, COMMUTE_HEADER, HOURS_HEADER
from .timeseries import PriceSeries, format_price_csv


def _csv(header, rows) -> bytes:
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    return ("\n".join(lines) + "\n").encode("utf-8")


def commute_records(n: int, seed: int = 11) -> bytes:
    """One-way commutes: lognormal distance, noisy average speed, 5-minute durations."""
    rng = np.random.default_rng(seed)
    distance = np.clip(np.round(rng.lognormal(np.log(10.0), 0.8, n), 1), 0.5, 80.0)
    speed = np.clip(rng.normal(28.0, 8.0, n), 8.0, 60.0)
    duration = np.maximum(np.round(distance / speed * 12) / 12, 1 / 12)
    weight = np.round(rng.uniform(0.5, 1.5, n), 3)
    rows = [(d, round(float(t), 4), w) for d, t, w in zip(distance.tolist(), duration.tolist(), weight.tolist())]
    return _csv(COMMUTE_HEADER, rows)


ARRIVAL_WEIGHTS = {
    0: 1.0, 1: 0.5, 2: 0.5, 3: 0.5, 4: 1.5, 5: 4.0, 6: 9.0, 7: 22.0, 8: 24.0, 9: 12.0,
    10: 5.0, 11: 3.0, 12: 2.0, 13: 2.0, 14: 2.0, 15: 2.0, 16: 2.0, 17: 1.0, 18: 1.0,
    19: 1.0, 20: 1.0, 21: 1.0, 22: 2.0, 23: 1.0,
}

WEEKLY_HOURS_WEIGHTS = {
    5: 2.0, 8: 2.0, 10: 3.0, 15: 3.0, 20: 5.0, 25: 4.0, 30: 6.0, 35: 7.0, 40: 40.0,
    45: 8.0, 50: 9.0, 55: 3.0, 60: 5.0, 70: 2.0,
}

# Approximate pack capacity, EPA range and relative US sales of common
# battery-electric models around 2019; weights are rounded, not official.
EV_MODELS = [
    ("Tesla Model 3 SR+", 54.0, 240.0, 60.0),
    ("Tesla Model 3 LR", 75.0, 310.0, 95.0),
    ("Tesla Model S", 100.0, 370.0, 14.0),
    ("Tesla Model X", 100.0, 325.0, 19.0),
    ("Chevrolet Bolt EV", 60.0, 238.0, 16.0),
    ("Nissan Leaf", 40.0, 150.0, 9.0),
    ("Nissan Leaf Plus", 62.0, 226.0, 3.0),
    ("BMW i3", 42.0, 153.0, 5.0),
    ("Audi e-tron", 95.0, 204.0, 5.0),
    ("Hyundai Kona Electric", 64.0, 258.0, 5.0),
    ("Kia Niro EV", 64.0, 239.0, 4.0),
    ("Volkswagen e-Golf", 35.8, 125.0, 5.0),
    ("Jaguar I-Pace", 90.0, 234.0, 3.0),
]

# Lithium-ion pack prices, $/kWh, 2010-2019 (rounded values of the widely
# reported industry price survey).
BATTERY_COST_HISTORY = [
    (2010, 1183.0), (2011, 917.0), (2012, 721.0), (2013, 663.0), (2014, 588.0),
    (2015, 384.0), (2016, 296.0), (2017, 221.0), (2018, 181.0), (2019, 156.0),
]


def _year_hours(year: int):
    start = dt.date(year, 1, 1)
    n_days = (dt.date(year + 1, 1, 1) - start).days
    hour = np.tile(np.arange(24), n_days)
    day = np.repeat(np.arange(n_days), 24)
    weekday = np.array([(start + dt.timedelta(days=int(d))).weekday() for d in day])
    return start, hour, day, weekday


def two_regime_prices(year: int = 2019, seed: int = 2019, spike_prob: float = 0.003) -> PriceSeries:
    """A flat, noisy off-peak regime punctuated by rare scarcity hours.

    Typical hours sit near $0.03/kWh with a weak daily and seasonal shape, so
    buying back sold energy through a 70% round trip never pays. Scarcity hours
    occur independently of the hour of day at 10-30 cents.
    """
    rng = np.random.default_rng(seed)
    start, hour, day, weekday = _year_hours(year)
    season = 1.0 + 0.12 * np.cos(2 * np.pi * (day - 200) / 365.0)
    daily = 1.0 + 0.08 * np.cos(2 * np.pi * (hour - 17) / 24.0)
    weekend = np.where(weekday >= 5, 0.92, 1.0)
    base = 0.03 * season * daily * weekend * rng.lognormal(0.0, 0.12, hour.size)
    spikes = rng.random(hour.size) < spike_prob
    price = np.where(spikes, rng.uniform(0.10, 0.30, hour.size), base)
    return PriceSeries("two_regime", start, np.round(np.maximum(price, 0.0), 5))


def sample_city_prices(year: int = 2019, seed: int = 7) -> PriceSeries:
    """A city-like series: seasonal level, mild two-hump daily shape, heavier summer spikes."""
    rng = np.random.default_rng(seed)
    start, hour, day, weekday = _year_hours(year)
    season = 1.0 + 0.18 * np.cos(2 * np.pi * (day - 205) / 365.0)
    daily = (1.0 + 0.06 * np.exp(-0.5 * ((hour - 8) / 2.0) ** 2)
             + 0.10 * np.exp(-0.5 * ((hour - 18) / 2.5) ** 2))
    weekend = np.where(weekday >= 5, 0.9, 1.0)
    base = 0.028 * season * daily * weekend * rng.lognormal(0.0, 0.15, hour.size)
    summer = (day > 150) & (day < 250)
    spike_prob = np.where(summer, 0.008, 0.002)
    spikes = rng.random(hour.size) < spike_prob
    price = np.where(spikes, base + rng.gamma(2.0, 0.06, hour.size), base)
    return PriceSeries("sample_city", start, np.round(np.maximum(price, 0.0), 5))


def write_bundle(directory: Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {
        "commute.csv": commute_records(2000),
        "work_arrival.csv": _csv(ARRIVAL_HEADER, sorted(ARRIVAL_WEIGHTS.items())),
        "work_hours.csv": _csv(HOURS_HEADER, sorted(WEEKLY_HOURS_WEIGHTS.items())),
        "ev_catalog.csv": _csv(CATALOG_HEADER, EV_MODELS),
        "battery_cost_history.csv": _csv(("year", "cost_usd_per_kwh"), BATTERY_COST_HISTORY),
        "prices_two_regime_2019.csv": format_price_csv(two_regime_prices()),
        "prices_sample_city_2019.csv": format_price_csv(sample_city_prices()),
    }
    written = []
    for name, content in files.items():
        path = directory / name
        path.write_bytes(content)
        written.append(path)
    return written


if __name__ == "__main__":
    for path in write_bundle(Path(sys.argv[1] if len(sys.argv) > 1 else "data")):
        print(path)
