"""Shared fixtures: the bundled data, small hand-made profiles and price series."""

from __future__ import annotations

import datetime as dt
from dataclasses import replace

import numpy as np
import pytest

from v2gsim.battery import BatteryParams, DegradationParams
from v2gsim.config import default_config_path, load_inputs, load_run_config
from v2gsim.engine import Mode, ScenarioConfig
from v2gsim.population import UserProfile
from v2gsim.timeseries import PriceSeries, WorkCalendar, parse_price_csv

NO_FADE = DegradationParams(b1=0.0, c1=0.0)


def make_profile(**overrides) -> UserProfile:
    base = dict(commute_distance=10.0, commute_time=0.5, work_start=9, weekly_hours=40.0,
                vacation_weeks=1, vacation_start_week=10, ev_model="test",
                ev_capacity=60.0, ev_range=240.0, rng_seed=1)
    base.update(overrides)
    return UserProfile(**base)


def constant_prices(value: float, year: int = 2019) -> PriceSeries:
    n = (dt.date(year + 1, 1, 1) - dt.date(year, 1, 1)).days * 24
    return PriceSeries("const", dt.date(year, 1, 1), np.full(n, value))


def two_level_prices(work_hours, low=0.02, high=0.30, year: int = 2019) -> PriceSeries:
    """``high`` during the given hours of every day, ``low`` otherwise."""
    n_days = (dt.date(year + 1, 1, 1) - dt.date(year, 1, 1)).days
    day = np.full(24, low)
    day[list(work_hours)] = high
    return PriceSeries("two_level", dt.date(year, 1, 1), np.tile(day, n_days))


def scenario(mode=Mode.OSP, p=0.0, degradation=DegradationParams(), **battery) -> ScenarioConfig:
    return ScenarioConfig(mode, p, BatteryParams(**battery), degradation, 2019, 1)


@pytest.fixture(scope="session")
def calendar_2019() -> WorkCalendar:
    return WorkCalendar.us_federal(2019)


@pytest.fixture(scope="session")
def run_config():
    return load_run_config(default_config_path())


@pytest.fixture(scope="session")
def inputs(run_config):
    """Study inputs on the bundled two-regime price fixture."""
    return load_inputs(run_config)


@pytest.fixture(scope="session")
def city_inputs(run_config, inputs):
    """Same population data and settings on the bundled sample-city prices."""
    path = run_config.paths["prices"].with_name("prices_sample_city_2019.csv")
    return replace(inputs, prices=parse_price_csv(path.read_bytes(), "sample_city"))


# One line per acceptance criterion, printed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":")[2:])):
            terminalreporter.write_line(line)
