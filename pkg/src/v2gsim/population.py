"""Empirical distributions of commute, work schedule and EV model, and user sampling."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyDistribution, EmptyInput, InfeasiblePopulation, MalformedRow, NegativeWeight

COMMUTE_HEADER = ("distance_miles", "duration_hours", "weight")
ARRIVAL_HEADER = ("arrival_hour", "weight")
HOURS_HEADER = ("hours_per_week", "weight")
CATALOG_HEADER = ("name", "capacity_kwh", "range_miles", "sales_weight")

WORKDAYS_PER_WEEK = 5
MAX_VACATION_START_WEEK = 52
MAX_RETRIES = 1000


def _rows(content: bytes | str, header: tuple[str, ...]):
    if isinstance(content, bytes):
        content = content.decode("utf-8")
    if not content.strip():
        raise EmptyInput("distribution file is empty")
    reader = csv.reader(io.StringIO(content))
    got = tuple(h.strip() for h in next(reader))
    if got != header:
        raise MalformedRow(1, f"expected header {','.join(header)!r}, got {','.join(got)!r}")
    for row_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise MalformedRow(row_no, f"expected {len(header)} fields, got {len(row)}")
        yield row_no, [f.strip() for f in row]


def _number(text: str, row_no: int, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(row_no, f"{name}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise MalformedRow(row_no, f"{name}: not finite: {text!r}")
    return value


def _weight(text: str, row_no: int) -> float:
    w = _number(text, row_no, "weight")
    if w < 0:
        raise NegativeWeight(row_no)
    return w


def _probabilities(weights: np.ndarray, what: str) -> np.ndarray:
    total = weights.sum()
    if weights.size == 0 or not total > 0:
        raise EmptyDistribution(f"{what} has no record with positive weight")
    return weights / total


@dataclass(frozen=True, eq=False)
class CommuteDistribution:
    """Joint one-way commute (distance in miles, duration in hours) records."""

    distance: np.ndarray
    duration: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        _probabilities(self.weight, "commute distribution")
        if np.any(self.distance < 0) or np.any(self.duration < 0):
            raise ValueError("distances and durations must be non-negative")

    @property
    def probabilities(self) -> np.ndarray:
        return _probabilities(self.weight, "commute distribution")


@dataclass(frozen=True, eq=False)
class WorkDistribution:
    """Independent marginals for arrival hour and weekly hours worked."""

    arrival_hour: np.ndarray
    arrival_weight: np.ndarray
    weekly_hours: np.ndarray
    hours_weight: np.ndarray

    def __post_init__(self):
        _probabilities(self.arrival_weight, "arrival distribution")
        _probabilities(self.hours_weight, "weekly hours distribution")
        if np.any((self.arrival_hour < 0) | (self.arrival_hour >= 24)):
            raise ValueError("arrival hours must lie in [0, 24)")
        if np.any((self.weekly_hours <= 0) | (self.weekly_hours > 168)):
            raise ValueError("weekly hours must lie in (0, 168]")


@dataclass(frozen=True, eq=False)
class EVCatalog:
    names: tuple[str, ...]
    capacity_kwh: np.ndarray
    range_miles: np.ndarray
    sales_weight: np.ndarray

    def __post_init__(self):
        _probabilities(self.sales_weight, "EV catalog")
        if np.any(self.capacity_kwh <= 0) or np.any(self.range_miles <= 0):
            raise ValueError("capacity and range must be positive")


def load_commute_distribution(content: bytes | str) -> CommuteDistribution:
    dist, dur, w = [], [], []
    for row_no, row in _rows(content, COMMUTE_HEADER):
        d = _number(row[0], row_no, "distance_miles")
        t = _number(row[1], row_no, "duration_hours")
        if d < 0 or t < 0:
            raise MalformedRow(row_no, "distance and duration must be non-negative")
        dist.append(d)
        dur.append(t)
        w.append(_weight(row[2], row_no))
    weights = np.array(w)
    _probabilities(weights, "commute distribution")
    return CommuteDistribution(np.array(dist), np.array(dur), weights)


def _load_marginal(content, header, in_range, range_text):
    values, weights = [], []
    for row_no, row in _rows(content, header):
        v = _number(row[0], row_no, header[0])
        if not in_range(v):
            raise MalformedRow(row_no, f"{header[0]} {v} outside {range_text}")
        values.append(v)
        weights.append(_weight(row[1], row_no))
    weights = np.array(weights)
    _probabilities(weights, header[0])
    return np.array(values), weights


def load_work_distribution(arrival_content: bytes | str, hours_content: bytes | str) -> WorkDistribution:
    arrival, aw = _load_marginal(arrival_content, ARRIVAL_HEADER, lambda v: 0 <= v < 24, "[0, 24)")
    hours, hw = _load_marginal(hours_content, HOURS_HEADER, lambda v: 0 < v <= 168, "(0, 168]")
    return WorkDistribution(arrival, aw, hours, hw)


def load_ev_catalog(content: bytes | str) -> EVCatalog:
    names, cap, rng, w = [], [], [], []
    for row_no, row in _rows(content, CATALOG_HEADER):
        c = _number(row[1], row_no, "capacity_kwh")
        r = _number(row[2], row_no, "range_miles")
        if c <= 0 or r <= 0:
            raise MalformedRow(row_no, "capacity and range must be positive")
        names.append(row[0])
        cap.append(c)
        rng.append(r)
        w.append(_weight(row[3], row_no))
    weights = np.array(w)
    _probabilities(weights, "EV catalog")
    return EVCatalog(tuple(names), np.array(cap), np.array(rng), weights)


@dataclass(frozen=True)
class PopulationData:
    commute: CommuteDistribution
    work: WorkDistribution
    catalog: EVCatalog


def work_slots(weekly_hours: float) -> int:
    """Hours at work per working day, rounded half-up to the hourly grid, at least 1."""
    return max(1, math.floor(weekly_hours / WORKDAYS_PER_WEEK + 0.5))


def commute_slots(commute_hours: float) -> int:
    """Hourly slots occupied by one commute leg.

    The duration is rounded to the nearest quarter hour (any positive commute
    takes at least a quarter) and each started hour occupies a slot.
    """
    if commute_hours <= 0:
        return 0
    quarters = max(1, math.floor(commute_hours * 4 + 0.5))
    return math.ceil(quarters / 4)


@dataclass(frozen=True)
class UserProfile:
    """One sampled EV owner.

    Distances and times are one-way. ``work_start`` is an hour of day on the
    integer grid; schedules may run past midnight.
    """

    commute_distance: float
    commute_time: float
    work_start: int
    weekly_hours: float
    vacation_weeks: int
    vacation_start_week: int
    ev_model: str
    ev_capacity: float
    ev_range: float
    rng_seed: int

    @property
    def commute_energy(self) -> float:
        """Battery-side kWh for one leg."""
        return self.commute_distance * self.ev_capacity / self.ev_range

    @property
    def work_hours_per_day(self) -> int:
        return work_slots(self.weekly_hours)

    @property
    def commute_hours_slots(self) -> int:
        return commute_slots(self.commute_time)

    @property
    def home_hours_per_workday(self) -> int:
        return 24 - self.work_hours_per_day - 2 * self.commute_hours_slots

    def violations(self, dod: float, min_charge_rate: float | None = None) -> list[str]:
        """Names of the feasibility rules this profile breaks (empty when valid)."""
        bad = []
        if self.home_hours_per_workday < 0:
            bad.append("day_closure")
        if 2 * self.commute_energy > dod * self.ev_capacity * (1 + 1e-12):
            bad.append("trip_feasibility")
        if self.commute_time <= 0 < self.commute_distance:
            bad.append("zero_time_commute")
        if self.vacation_weeks not in (1, 2, 3):
            bad.append("vacation_weeks")
        if (min_charge_rate is not None
                and max(self.home_hours_per_workday, 0) * min_charge_rate < 2 * self.commute_energy):
            bad.append("overnight_recharge")
        return bad


def sample_user(commute: CommuteDistribution, work: WorkDistribution, catalog: EVCatalog,
                dod: float, seed: int, min_charge_rate: float | None = None,
                max_retries: int = MAX_RETRIES) -> UserProfile:
    """Draw one feasible user profile by rejection sampling.

    Commute distance and time come from one jointly weighted record; arrival
    hour and weekly hours are drawn independently; the EV model is drawn in
    proportion to sales. If ``min_charge_rate`` (kW) is given, the overnight
    window on a workday must be long enough to put back a full round trip.
    """
    if not 0 < dod <= 1:
        raise ValueError("dod must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    p_commute = commute.probabilities
    p_arrival = _probabilities(work.arrival_weight, "arrival distribution")
    p_hours = _probabilities(work.hours_weight, "weekly hours distribution")
    p_ev = _probabilities(catalog.sales_weight, "EV catalog")
    for _ in range(max_retries):
        c = rng.choice(p_commute.size, p=p_commute)
        a = rng.choice(p_arrival.size, p=p_arrival)
        h = rng.choice(p_hours.size, p=p_hours)
        e = rng.choice(p_ev.size, p=p_ev)
        profile = UserProfile(
            commute_distance=float(commute.distance[c]),
            commute_time=float(commute.duration[c]),
            work_start=int(math.floor(work.arrival_hour[a])) % 24,
            weekly_hours=float(work.weekly_hours[h]),
            vacation_weeks=int(rng.integers(1, 4)),
            vacation_start_week=int(rng.integers(0, MAX_VACATION_START_WEEK)),
            ev_model=catalog.names[e],
            ev_capacity=float(catalog.capacity_kwh[e]),
            ev_range=float(catalog.range_miles[e]),
            rng_seed=int(seed),
        )
        if not profile.violations(dod, min_charge_rate):
            return profile
    raise InfeasiblePopulation(
        f"no feasible user after {max_retries} draws (seed {seed}); "
        "check commute distances against EV ranges and work hours against 24 h"
    )


def user_seeds(n: int, master_seed: int) -> list[int]:
    """Per-user seeds derived deterministically from ``master_seed``."""
    state = np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint64)
    return [int(s) for s in state]


def sample_population(n: int, data: PopulationData, dod: float, master_seed: int,
                      min_charge_rate: float | None = None) -> list[UserProfile]:
    if n < 1:
        raise ValueError("population size must be at least 1")
    return [sample_user(data.commute, data.work, data.catalog, dod, s, min_charge_rate)
            for s in user_seeds(n, master_seed)]
