"""One user-year of V2G operation at hourly resolution.

Battery-side energy drives the state of charge; money is computed on the grid
side of the meter. Selling ``e`` battery-side kWh delivers ``eta * e`` to the
grid and putting ``e`` back costs ``e / eta`` from it.
"""

from __future__ import annotations

import datetime as dt
import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel
from .battery import (
    SOC_TOL,
    BatteryParams,
    DegradationParams,
    capacity_remaining,
    degradation_cost,
    discharge_floor,
)
from .errors import ConfigError, SocOutOfBounds
from .population import UserProfile
from .timeseries import PriceSeries, WorkCalendar, working_day_mask


class Mode(str, enum.Enum):
    PRICE_TAKER = "price_taker"
    OSP = "osp"
    COMMUTE_ONLY = "commute_only"


class SlotState(enum.IntEnum):
    AT_HOME = _kernel.AT_HOME
    COMMUTING = _kernel.COMMUTING
    AT_WORK = _kernel.AT_WORK
    IDLE = _kernel.IDLE


@dataclass(frozen=True)
class ScenarioConfig:
    """How the user trades. ``battery.capacity_kwh`` is replaced by the user's EV."""

    mode: Mode = Mode.OSP
    selling_price: float = 0.0
    battery: BatteryParams = field(default_factory=BatteryParams)
    degradation: DegradationParams = field(default_factory=DegradationParams)
    year: int = 2019
    reserve_legs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.OSP and not self.selling_price >= 0:
            raise ConfigError("selling price must be >= 0 in osp mode")
        if self.reserve_legs not in (1, 2):
            raise ConfigError("reserve_legs must be 1 or 2")

    def with_mode(self, mode: Mode | str, selling_price: float | None = None) -> "ScenarioConfig":
        price = self.selling_price if selling_price is None else selling_price
        return replace(self, mode=Mode(mode), selling_price=price)


@dataclass(frozen=True)
class DaySchedule:
    """The repeating workday pattern.

    ``slots[h]`` is the state during hour ``h`` modulo 24. ``blocks`` lists
    ``(offset, state)`` relative to midnight of the day the shift starts;
    offsets run from -commute to 24 + shift length, so a night shift spills
    into the next calendar day.
    """

    slots: tuple[SlotState, ...]
    blocks: tuple[tuple[int, SlotState], ...]
    work_start: int
    work_hours: int
    commute_slots: int

    @property
    def home_start(self) -> int:
        """Hour of day the user arrives home."""
        return (self.work_start + self.work_hours + self.commute_slots) % 24

    def hours(self, state: SlotState) -> list[int]:
        return [h for h, s in enumerate(self.slots) if s == state]


def build_schedule(profile: UserProfile) -> DaySchedule:
    start = profile.work_start
    work = profile.work_hours_per_day
    commute = profile.commute_hours_slots
    blocks = [(start - commute + k, SlotState.COMMUTING) for k in range(commute)]
    blocks += [(start + k, SlotState.AT_WORK) for k in range(work)]
    blocks += [(start + work + k, SlotState.COMMUTING) for k in range(commute)]
    slots = [SlotState.AT_HOME] * 24
    for offset, state in blocks:
        slots[offset % 24] = state
    return DaySchedule(tuple(slots), tuple(blocks), start, work, commute)


def step_power(slot_state: SlotState, soc: float, price: float, scenario: ScenarioConfig,
               floor: float, commute_energy: float = 0.0) -> tuple[float, float, float]:
    """Energy and cash for one hour.

    Returns ``(grid_energy, battery_energy, cash)``: grid energy is positive when
    exported, battery energy positive when charging, and cash positive when the
    user is paid. ``commute_energy`` is the battery-side draw of one commuting
    slot.
    """
    b = scenario.battery
    if not 1 - b.dod - SOC_TOL <= soc <= 1 + SOC_TOL:
        raise SocOutOfBounds(f"soc {soc} outside [{1 - b.dod}, 1]")
    if slot_state == SlotState.AT_WORK:
        gate = (scenario.mode is Mode.PRICE_TAKER
                or (scenario.mode is Mode.OSP and price > scenario.selling_price))
        if not gate:
            return 0.0, 0.0, 0.0
        e = min(b.discharge_rate_kw, (soc - floor) * b.capacity_kwh)
        if e <= 0:
            return 0.0, 0.0, 0.0
        grid = b.efficiency * e
        return grid, -e, grid * price
    if slot_state == SlotState.AT_HOME:
        e = min(b.charge_rate_kw, (1 - soc) * b.capacity_kwh)
        if e <= 0:
            return 0.0, 0.0, 0.0
        grid = e / b.efficiency
        return -grid, e, -grid * price
    if slot_state == SlotState.COMMUTING:
        return 0.0, -commute_energy, 0.0
    return 0.0, 0.0, 0.0


@dataclass(frozen=True)
class AnnualResult:
    revenue: float
    energy_cost: float
    deg_cost: float
    net: float
    kwh_sold: float
    kwh_bought: float
    final_q: float
    n_cyc: float
    final_soc: float
    kwh_commute: float
    min_soc: float
    max_soc: float


RESULT_COLUMNS = ("user_id", "mode", "p", "revenue", "energy_cost", "deg_cost", "net",
                  "kwh_sold", "kwh_bought", "final_q", "n_cyc", "savings")


def result_row(user_id: int, mode: Mode | str, p: float | None, result: AnnualResult,
               savings: float) -> dict:
    return {
        "user_id": user_id,
        "mode": Mode(mode).value,
        "p": "" if p is None else p,
        "revenue": result.revenue,
        "energy_cost": result.energy_cost,
        "deg_cost": result.deg_cost,
        "net": result.net,
        "kwh_sold": result.kwh_sold,
        "kwh_bought": result.kwh_bought,
        "final_q": result.final_q,
        "n_cyc": result.n_cyc,
        "savings": savings,
    }


def vacation_days(calendar: WorkCalendar, profile: UserProfile) -> set[dt.date]:
    """Consecutive vacation weeks starting on the user's sampled Monday."""
    jan1 = dt.date(calendar.year, 1, 1)
    first_monday = jan1 + dt.timedelta(days=(7 - jan1.weekday()) % 7)
    mondays = [d for d in calendar.days if d >= first_monday and d.weekday() == 0]
    start = mondays[profile.vacation_start_week % len(mondays)]
    return {start + dt.timedelta(days=k) for k in range(7 * profile.vacation_weeks)
            if (start + dt.timedelta(days=k)).year == calendar.year}


def year_timeline(profile: UserProfile, calendar: WorkCalendar) -> tuple[np.ndarray, np.ndarray]:
    """Hourly slot states and commute draws for the whole year.

    Shifts of working, non-vacation days are laid onto an all-at-home year;
    hours that run past either end of the year wrap around to the other end.
    """
    schedule = build_schedule(profile)
    days = calendar.days
    n = len(days) * 24
    labels = np.full(n, SlotState.AT_HOME, dtype=np.int8)
    commute = np.zeros(n)
    per_slot = profile.commute_energy / schedule.commute_slots if schedule.commute_slots else 0.0
    off = vacation_days(calendar, profile)
    working = working_day_mask(calendar)
    for d, day in enumerate(days):
        if not working[d] or day in off:
            continue
        for offset, state in schedule.blocks:
            i = (24 * d + offset) % n
            labels[i] = state
            if state == SlotState.COMMUTING:
                commute[i] = per_slot
    return labels, commute


class UserYear:
    """A user's year prepared for repeated simulation under different scenarios.

    Building the timeline dominates setup, so optimizers create one of these
    and call :meth:`run` for every candidate selling price.
    """

    def __init__(self, profile: UserProfile, prices: PriceSeries, calendar: WorkCalendar,
                 scenario: ScenarioConfig):
        if calendar.year != scenario.year:
            raise ConfigError(f"calendar year {calendar.year} != scenario year {scenario.year}")
        self.profile = profile
        self.scenario = replace(scenario, battery=scenario.battery.with_capacity(profile.ev_capacity))
        self.prices = np.ascontiguousarray(prices.year_prices(scenario.year), dtype=np.float64)
        self.labels, self.commute = year_timeline(profile, calendar)
        self.floor = discharge_floor(self.scenario.battery, profile.commute_energy,
                                     self.scenario.reserve_legs)
        self._always = np.ones(self.prices.size, dtype=np.bool_)

    def run(self, mode: Mode | str | None = None, selling_price: float | None = None,
            battery: BatteryParams | None = None, degradation: DegradationParams | None = None,
            soc_trace: np.ndarray | None = None) -> AnnualResult:
        """Simulate the year; arguments override the prepared scenario."""
        sc = self.scenario
        mode = sc.mode if mode is None else Mode(mode)
        p = sc.selling_price if selling_price is None else selling_price
        b = sc.battery if battery is None else battery.with_capacity(self.profile.ev_capacity)
        deg = sc.degradation if degradation is None else degradation
        floor = self.floor if battery is None else discharge_floor(
            b, self.profile.commute_energy, sc.reserve_legs)
        if mode is Mode.OSP:
            if not p >= 0:
                raise ConfigError("selling price must be >= 0 in osp mode")
            sell_ok = self.prices > p
        else:
            sell_ok = self._always
        trace = _kernel.empty_trace() if soc_trace is None else soc_trace
        (revenue, energy_cost, sold, bought, discharged, commuted,
         final_soc, min_soc, max_soc, violation) = _kernel.run_hours(
            self.labels, sell_ok, self.prices, self.commute, b.capacity_kwh, b.dod,
            b.efficiency, b.charge_rate_kw, b.discharge_rate_kw, floor,
            mode is not Mode.COMMUTE_ONLY, trace)
        if violation >= 0:
            raise SocOutOfBounds(
                f"soc left [{1 - b.dod}, 1] at hour {violation} for user {self.profile.rng_seed}")
        n_cyc = discharged / b.usable_kwh
        q_end = capacity_remaining(deg, self.prices.size / 24.0, n_cyc)
        deg_cost = degradation_cost(b, capacity_remaining(deg, 0.0, 0.0), q_end)
        return AnnualResult(
            revenue=revenue,
            energy_cost=energy_cost,
            deg_cost=deg_cost,
            net=revenue - energy_cost - deg_cost,
            kwh_sold=sold,
            kwh_bought=bought,
            final_q=q_end,
            n_cyc=n_cyc,
            final_soc=final_soc,
            kwh_commute=commuted,
            min_soc=min_soc,
            max_soc=max_soc,
        )

    def savings(self, result: AnnualResult, battery: BatteryParams | None = None,
                degradation: DegradationParams | None = None) -> float:
        base = self.run(Mode.COMMUTE_ONLY, battery=battery, degradation=degradation)
        return result.net - base.net


def simulate_year(profile: UserProfile, prices: PriceSeries, calendar: WorkCalendar,
                  scenario: ScenarioConfig) -> AnnualResult:
    """Cash flows, degradation and energy totals for one user-year.

    The battery starts full. Degradation cost is the amortized fade between
    the fresh battery and the end of the year; per-hour accrual telescopes to
    exactly this amount.
    """
    return UserYear(profile, prices, calendar, scenario).run()


def annual_savings(profile: UserProfile, prices: PriceSeries, calendar: WorkCalendar,
                   scenario_v2g: ScenarioConfig) -> float:
    """Net of the V2G scenario minus net of commuting alone with the same battery."""
    year = UserYear(profile, prices, calendar, scenario_v2g)
    return year.savings(year.run())
