"""Battery parameters, state of charge bookkeeping and capacity fade.

Capacity fade follows a semi-empirical calendar/cycle form: the remaining
capacity is the smaller of a lithium-inventory term that decays with a power of
elapsed days and a sites term that decays linearly in equivalent full cycles.
Fade is priced by amortizing the pack cost over the fade allowed before
replacement (the saturation factor).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ConfigError, InfeasibleCommute, NegativeTimestep, SocOutOfBounds

# Slack for float round-off at the SoC bounds, as a fraction of capacity.
SOC_TOL = 1e-9


@dataclass(frozen=True)
class BatteryParams:
    capacity_kwh: float = 60.0
    dod: float = 0.9
    efficiency: float = 0.837
    charge_rate_kw: float = 11.5
    discharge_rate_kw: float = 11.5
    capital_cost: float = 156.0
    saturation_factor: float = 0.2

    def __post_init__(self):
        if not self.capacity_kwh > 0:
            raise ConfigError("capacity_kwh must be positive")
        if not 0 < self.dod <= 1:
            raise ConfigError("dod must lie in (0, 1]")
        if not 0 < self.efficiency <= 1:
            raise ConfigError("efficiency must lie in (0, 1]")
        if not (self.charge_rate_kw > 0 and self.discharge_rate_kw > 0):
            raise ConfigError("charge and discharge rates must be positive")
        if not self.capital_cost >= 0:
            raise ConfigError("capital_cost must be non-negative")
        if not 0 < self.saturation_factor <= 1:
            raise ConfigError("saturation_factor must lie in (0, 1]")

    @property
    def usable_kwh(self) -> float:
        return self.dod * self.capacity_kwh

    def with_capacity(self, capacity_kwh: float) -> "BatteryParams":
        return replace(self, capacity_kwh=capacity_kwh)


@dataclass(frozen=True)
class DegradationParams:
    """Coefficients of ``Q = min(b0 + b1 * days**z, c0 + c1 * cycles)``.

    The defaults are calibration placeholders that take a daily-cycled pack
    to roughly 80% capacity in about ten years.
    """

    b0: float = 1.0
    b1: float = -2.5e-4
    z: float = 0.5
    c0: float = 1.0
    c1: float = -5e-5

    def __post_init__(self):
        if self.b0 != 1.0 or self.c0 != 1.0:
            raise ConfigError("b0 and c0 must be 1 (fresh battery has Q = 1)")
        if self.b1 > 0 or self.c1 > 0:
            raise ConfigError("b1 and c1 must be <= 0 (capacity never increases)")
        if self.z <= 0:
            raise ConfigError("z must be positive")


@dataclass(frozen=True)
class BatteryState:
    soc: float = 1.0
    age_days: float = 0.0
    equivalent_cycles: float = 0.0
    q_remaining: float = 1.0
    deg_cost_accrued: float = 0.0


def capacity_remaining(params: DegradationParams, age_days: float, n_cyc: float) -> float:
    q_li = params.b0 + params.b1 * age_days ** params.z
    q_sites = params.c0 + params.c1 * n_cyc
    return min(q_li, q_sites)


def degradation_cost(battery: BatteryParams, q_before: float, q_after: float) -> float:
    """Dollar cost of fading from ``q_before`` to ``q_after``."""
    return battery.capital_cost * battery.capacity_kwh * (q_before - q_after) / battery.saturation_factor


def accrue_step(state: BatteryState, params: BatteryParams, deg: DegradationParams,
                battery_side_energy: float, dt: float) -> BatteryState:
    """Advance the battery by one step of ``dt`` hours.

    ``battery_side_energy`` is positive when charging. Only discharged energy
    counts toward equivalent cycles, one cycle per ``dod * capacity`` kWh.
    """
    if dt < 0:
        raise NegativeTimestep(f"dt must be non-negative, got {dt}")
    limit = max(params.charge_rate_kw, params.discharge_rate_kw) * dt * (1 + 1e-9)
    if abs(battery_side_energy) > limit:
        raise ValueError(f"|{battery_side_energy}| kWh exceeds rate limit {limit} kWh")

    soc = state.soc + battery_side_energy / params.capacity_kwh
    if not (1 - params.dod - SOC_TOL <= soc <= 1 + SOC_TOL):
        raise SocOutOfBounds(f"soc {soc} outside [{1 - params.dod}, 1]")

    age = state.age_days + dt / 24.0
    cycles = state.equivalent_cycles
    if battery_side_energy < 0:
        cycles += -battery_side_energy / params.usable_kwh
    q = capacity_remaining(deg, age, cycles)
    cost = degradation_cost(params, state.q_remaining, q)
    return BatteryState(soc, age, cycles, q, state.deg_cost_accrued + cost)


def discharge_floor(params: BatteryParams, commute_energy: float, reserve_legs: int = 1) -> float:
    """SoC below which workplace selling stops.

    The floor keeps ``reserve_legs`` commute legs of battery-side energy above
    the depth-of-discharge limit.
    """
    if reserve_legs not in (1, 2):
        raise ConfigError("reserve_legs must be 1 or 2")
    if commute_energy < 0:
        raise InfeasibleCommute("commute energy must be non-negative")
    if 2 * commute_energy > params.usable_kwh * (1 + 1e-12):
        raise InfeasibleCommute(
            f"round trip of {2 * commute_energy:.3f} kWh exceeds usable "
            f"{params.usable_kwh:.3f} kWh"
        )
    return (1 - params.dod) + reserve_legs * commute_energy / params.capacity_kwh
