"""Population studies: savings distributions, efficiency/rate sweeps, battery-cost projections.

Every study samples its users once and evaluates all arms on that same
population with the same optimizer seeds, so differences between arms are due
to the varied parameter alone. Work fans out per user and is collected in user
order, which keeps results identical for any number of worker processes.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .battery import BatteryParams
from .engine import AnnualResult, Mode, ScenarioConfig, UserYear
from .errors import ConfigError, EmptyInput, MalformedRow, NonPositiveCost, TooFewPoints
from .optimizer import EvaluationRecord, OptimizerConfig, optimize_user_year
from .population import PopulationData, UserProfile, sample_population
from .timeseries import PriceSeries, WorkCalendar


@dataclass(frozen=True)
class StudyInputs:
    """Everything a study needs besides its own knobs."""

    prices: PriceSeries
    calendar: WorkCalendar
    population: PopulationData
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    min_charge_rate: float | None = 3.3


@dataclass(frozen=True)
class StudyConfig:
    city_id: str = "city"
    population_size: int = 1000
    scenarios: tuple[Mode, ...] = (Mode.PRICE_TAKER, Mode.OSP)
    eta_values: tuple[float, ...] = (0.837, 0.90, 0.99)
    rate_values: tuple[float, ...] = (3.3, 11.5, 15.0)
    cost_years: tuple[int, int] = (2020, 2050)
    master_seed: int = 2019

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(Mode(m) for m in self.scenarios))
        if self.population_size < 1:
            raise ConfigError("population_size must be >= 1")
        if Mode.COMMUTE_ONLY in self.scenarios:
            raise ConfigError("commute_only is the baseline, not a study scenario")
        if any(not 0 < e <= 1 for e in self.eta_values):
            raise ConfigError("efficiencies must lie in (0, 1]")
        if any(not r > 0 for r in self.rate_values):
            raise ConfigError("charging rates must be positive")
        if self.cost_years[0] > self.cost_years[1]:
            raise ConfigError("cost_years must be (first, last)")


@dataclass(frozen=True)
class UserOutcome:
    user_id: int
    profile: UserProfile
    mode: Mode
    p_star: float | None
    result: AnnualResult
    savings: float
    trace: tuple[EvaluationRecord, ...] = ()


def summarize(values: Sequence[float]) -> dict[str, float]:
    v = np.asarray(values, dtype=float)
    q25, q50, q75 = np.quantile(v, [0.25, 0.5, 0.75])
    return {
        "n": int(v.size),
        "mean": float(v.mean()),
        "q25": float(q25),
        "q50": float(q50),
        "q75": float(q75),
        "min": float(v.min()),
        "max": float(v.max()),
    }


@dataclass(frozen=True)
class SavingsDistribution:
    mode: Mode
    rows: tuple[UserOutcome, ...]

    @property
    def savings(self) -> np.ndarray:
        return np.array([r.savings for r in self.rows])

    @property
    def aggregates(self) -> dict[str, float]:
        return summarize(self.savings)

    @property
    def mean(self) -> float:
        return self.aggregates["mean"]


@dataclass(frozen=True)
class StudyResult:
    config: StudyConfig
    population: tuple[UserProfile, ...]
    distributions: dict[Mode, SavingsDistribution]


# Worker plumbing: inputs are shipped once per process, tasks carry only users.
_INPUTS: StudyInputs | None = None


def _init_worker(inputs: StudyInputs):
    global _INPUTS
    _INPUTS = inputs


def _call(job):
    fn, task = job
    return fn(_INPUTS, task)


def parallel_map(fn: Callable, inputs: StudyInputs, tasks: list, jobs: int = 1) -> list:
    """``[fn(inputs, t) for t in tasks]``, optionally across processes, in task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(inputs, t) for t in tasks]
    chunk = max(1, math.ceil(len(tasks) / (4 * jobs)))
    with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(inputs,)) as pool:
        return list(pool.map(_call, [(fn, t) for t in tasks], chunksize=chunk))


def draw_population(config: StudyConfig, inputs: StudyInputs) -> list[UserProfile]:
    return sample_population(config.population_size, inputs.population,
                             inputs.scenario.battery.dod, config.master_seed,
                             min_charge_rate=inputs.min_charge_rate)


def _user_year(inputs: StudyInputs, profile: UserProfile) -> UserYear:
    return UserYear(profile, inputs.prices, inputs.calendar, inputs.scenario)


def _evaluate_user(inputs: StudyInputs, task) -> list[UserOutcome]:
    user_id, profile, scenarios = task
    year = _user_year(inputs, profile)
    base = year.run(Mode.COMMUTE_ONLY).net
    out = []
    for mode in scenarios:
        if mode is Mode.OSP:
            opt = optimize_user_year(year, inputs.optimizer)
            result = year.run(Mode.OSP, opt.p_star)
            out.append(UserOutcome(user_id, profile, mode, opt.p_star, result,
                                   result.net - base, opt.trace))
        else:
            result = year.run(mode)
            out.append(UserOutcome(user_id, profile, mode, None, result, result.net - base))
    return out


def run_population_study(config: StudyConfig, inputs: StudyInputs, jobs: int = 1,
                         population: Sequence[UserProfile] | None = None) -> StudyResult:
    """Savings distribution per scenario on one paired population."""
    users = list(population) if population is not None else draw_population(config, inputs)
    tasks = [(i, u, config.scenarios) for i, u in enumerate(users)]
    per_user = parallel_map(_evaluate_user, inputs, tasks, jobs)
    dists = {mode: SavingsDistribution(mode, tuple(outcomes[k] for outcomes in per_user))
             for k, mode in enumerate(config.scenarios)}
    return StudyResult(config, tuple(users), dists)


def _osp_savings(year: UserYear, optimizer: OptimizerConfig, battery: BatteryParams) -> float:
    opt = optimize_user_year(year, optimizer, battery=battery)
    return opt.n_star - year.run(Mode.COMMUTE_ONLY, battery=battery).net


def _osp_per_battery(inputs: StudyInputs, task) -> list[float]:
    profile, batteries = task
    year = _user_year(inputs, profile)
    return [_osp_savings(year, inputs.optimizer, b) for b in batteries]


@dataclass(frozen=True)
class SweepCell:
    eta: float
    r_ch: float
    savings: np.ndarray

    @property
    def summary(self) -> dict[str, float]:
        return summarize(self.savings)

    @property
    def mean(self) -> float:
        return float(self.savings.mean())


def sweep_efficiency_rate(config: StudyConfig, inputs: StudyInputs,
                          eta_values: Sequence[float] | None = None,
                          rate_values: Sequence[float] | None = None, jobs: int = 1,
                          population: Sequence[UserProfile] | None = None) -> list[SweepCell]:
    """OSP savings over an (efficiency x charging rate) grid, paired across cells.

    The rate applies to charging and discharging alike.
    """
    etas = tuple(config.eta_values if eta_values is None else eta_values)
    rates = tuple(config.rate_values if rate_values is None else rate_values)
    base = inputs.scenario.battery
    cells = [(e, r) for e in etas for r in rates]
    batteries = [replace(base, efficiency=e, charge_rate_kw=r, discharge_rate_kw=r) for e, r in cells]
    users = list(population) if population is not None else draw_population(config, inputs)
    per_user = np.array(parallel_map(_osp_per_battery, inputs, [(u, batteries) for u in users], jobs))
    return [SweepCell(e, r, per_user[:, k]) for k, (e, r) in enumerate(cells)]


def load_cost_history(content: bytes | str) -> list[tuple[int, float]]:
    if isinstance(content, bytes):
        content = content.decode("utf-8")
    if not content.strip():
        raise EmptyInput("cost history is empty")
    reader = csv.reader(io.StringIO(content))
    header = tuple(h.strip() for h in next(reader))
    if header != ("year", "cost_usd_per_kwh"):
        raise MalformedRow(1, "expected header 'year,cost_usd_per_kwh'")
    history = []
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            history.append((int(row[0]), float(row[1])))
        except (ValueError, IndexError):
            raise MalformedRow(row_no, f"bad row {row!r}") from None
    return history


@dataclass(frozen=True)
class CostProjection:
    """``cost(year) = a * exp(-k * (year - y0))`` in $/kWh."""

    a: float
    k: float
    y0: int
    last_year: int = 2050

    def cost(self, year: float) -> float:
        return self.a * math.exp(-self.k * (year - self.y0))

    def projection(self, first: int | None = None, last: int | None = None) -> list[tuple[int, float]]:
        first = self.y0 + 1 if first is None else first
        last = self.last_year if last is None else last
        return [(y, self.cost(y)) for y in range(first, last + 1)]


def fit_battery_cost(history: Sequence[tuple[int, float]], last_year: int = 2050) -> CostProjection:
    """Least-squares line through ``log(cost)`` against years since the last observation."""
    if len(history) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(history)}")
    years = np.array([h[0] for h in history], dtype=float)
    costs = np.array([h[1] for h in history], dtype=float)
    if np.any(costs <= 0):
        raise NonPositiveCost("battery costs must be positive")
    y0 = int(years.max())
    slope, intercept = np.polyfit(years - y0, np.log(costs), 1)
    return CostProjection(float(math.exp(intercept)), float(-slope), y0, last_year)


@dataclass(frozen=True)
class CostYear:
    year: int
    c_b: float
    savings: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.savings.mean())


def battery_cost_study(config: StudyConfig, inputs: StudyInputs, projection: CostProjection,
                       jobs: int = 1, population: Sequence[UserProfile] | None = None) -> list[CostYear]:
    """Mean OSP savings per projected year; only the pack cost changes between years."""
    first, last = config.cost_years
    years = projection.projection(first, last)
    base = inputs.scenario.battery
    batteries = [replace(base, capital_cost=c) for _, c in years]
    users = list(population) if population is not None else draw_population(config, inputs)
    per_user = np.array(parallel_map(_osp_per_battery, inputs, [(u, batteries) for u in users], jobs))
    return [CostYear(y, c, per_user[:, k]) for k, (y, c) in enumerate(years)]
