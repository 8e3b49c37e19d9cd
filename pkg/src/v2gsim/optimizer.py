"""Per-user choice of the selling price by Bayesian optimization.

The annual net profit is a piecewise-constant function of the selling price
(it only changes when the threshold crosses an hourly price), cheap enough to
evaluate a few dozen times but not smooth. A Gaussian-process surrogate with
expected improvement locates the plateau; an exhaustive grid search is kept as
the reference it is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.stats import norm, qmc

from .battery import BatteryParams
from .engine import Mode, ScenarioConfig, UserYear
from .errors import ConfigError
from .population import UserProfile
from .timeseries import PriceSeries, WorkCalendar

N_CANDIDATES = 1000
EI_XI = 0.01  # exploration margin, in standardized objective units


@dataclass(frozen=True)
class OptimizerConfig:
    p_min: float = 0.0
    p_max: float | None = None  # None: p_max_quantile of the year's prices
    p_max_quantile: float = 1.0
    n_init: int = 6
    n_iter: int = 24
    noise_floor: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.n_init < 2:
            raise ConfigError("n_init must be >= 2")
        if self.n_iter < 0:
            raise ConfigError("n_iter must be >= 0")
        if self.p_max is not None and not self.p_min < self.p_max:
            raise ConfigError("p_min must be < p_max")
        if not 0 < self.p_max_quantile <= 1:
            raise ConfigError("p_max_quantile must lie in (0, 1]")
        if not self.noise_floor > 0:
            raise ConfigError("noise_floor must be positive")


@dataclass(frozen=True)
class EvaluationRecord:
    p: float
    objective: float
    iteration: int


@dataclass(frozen=True)
class OSPResult:
    p_star: float
    n_star: float
    trace: tuple[EvaluationRecord, ...]
    degenerate: bool = False

    def __iter__(self):
        return iter((self.p_star, self.n_star, self.trace))


def price_bounds(prices: np.ndarray, config: OptimizerConfig) -> tuple[float, float]:
    lo = config.p_min
    hi = config.p_max
    if hi is None:
        hi = float(np.quantile(prices, config.p_max_quantile))
        if hi <= lo:
            hi = float(prices.max())
        if hi <= lo:
            hi = lo + 1e-3
    return lo, hi


class LinearScale:
    """Maps the unit interval linearly onto ``[lo, hi]``."""

    def __init__(self, lo: float, hi: float):
        self.lo, self.hi = lo, hi

    def to_price(self, u):
        return self.lo + np.asarray(u) * (self.hi - self.lo)

    def to_unit(self, p):
        return (np.asarray(p) - self.lo) / (self.hi - self.lo)


class QuantileScale:
    """Maps the unit interval onto ``[lo, hi]`` half by price quantile, half linearly.

    The objective only changes where the threshold crosses an hourly price, so
    spacing candidates by price quantile puts resolution where prices are
    dense. Mixing in an equal number of evenly spaced knots keeps wide gaps
    between price regimes from collapsing to nothing.
    """

    def __init__(self, prices: np.ndarray, lo: float, hi: float):
        inside = prices[(prices > lo) & (prices < hi)]
        even = np.linspace(lo, hi, max(inside.size, 2))
        self.knots = np.sort(np.concatenate([inside, even]))
        self.lo, self.hi = lo, hi
        self._index = np.arange(self.knots.size, dtype=float)

    def to_price(self, u):
        return np.interp(np.asarray(u) * (self.knots.size - 1), self._index, self.knots)

    def to_unit(self, p):
        return np.interp(p, self.knots, self._index) / (self.knots.size - 1)


def _length_scale(x: np.ndarray) -> float:
    d = np.abs(x[:, None] - x[None, :])[np.triu_indices(x.size, k=1)]
    d = d[d > 0]
    return max(float(np.median(d)), 1e-3) if d.size else 1.0


def _posterior(x: np.ndarray, y: np.ndarray, xs: np.ndarray, noise: float):
    """Mean and standard deviation of a zero-mean unit-variance SE-kernel GP."""
    ell = _length_scale(x)
    k = np.exp(-0.5 * ((x[:, None] - x[None, :]) / ell) ** 2)
    k[np.diag_indices_from(k)] += noise
    ks = np.exp(-0.5 * ((x[:, None] - xs[None, :]) / ell) ** 2)
    factor = cho_factor(k, lower=True)
    mu = ks.T @ cho_solve(factor, y)
    var = 1.0 - np.einsum("ij,ij->j", ks, cho_solve(factor, ks))
    return mu, np.sqrt(np.clip(var, 1e-12, None))


def expected_improvement(mu: np.ndarray, sigma: np.ndarray, best: float, xi: float = EI_XI) -> np.ndarray:
    gain = mu - best - xi
    z = gain / sigma
    return gain * norm.cdf(z) + sigma * norm.pdf(z)


def initial_design(n: int, seed: int | np.random.SeedSequence) -> np.ndarray:
    """Both ends of the unit interval plus scrambled Halton points."""
    inner = qmc.Halton(d=1, scramble=True, seed=np.random.default_rng(seed)).random(n - 2)[:, 0]
    return np.concatenate([[0.0, 1.0], inner])


def bayes_maximize(objective: Callable[[float], float], lo: float, hi: float,
                   config: OptimizerConfig, initial: Sequence[float] | None = None,
                   seed: int | np.random.SeedSequence | None = None,
                   scale: LinearScale | QuantileScale | None = None) -> OSPResult:
    """Maximize a scalar function on ``[lo, hi]``.

    The surrogate lives on the unit interval; ``scale`` maps it to prices
    (linear by default). ``initial`` overrides the quasi-random starting
    prices. The best evaluated point is returned, ties going to the smaller
    price; if every evaluation returned the same value the midpoint is
    returned and flagged degenerate.
    """
    scale = LinearScale(lo, hi) if scale is None else scale
    if initial is None:
        x0 = initial_design(config.n_init, config.seed if seed is None else seed)
        p0 = scale.to_price(x0)
    else:
        p0 = np.asarray(initial, dtype=float)
        x0 = scale.to_unit(p0)
    candidates = np.linspace(0.0, 1.0, N_CANDIDATES)

    xs: list[float] = []
    ys: list[float] = []
    trace: list[EvaluationRecord] = []

    def evaluate(u: float, p: float):
        value = float(objective(p))
        if not math.isfinite(value):
            raise ValueError(f"objective is not finite at p={p}")
        xs.append(u)
        ys.append(value)
        trace.append(EvaluationRecord(p, value, len(trace)))

    for u, p in zip(x0, p0):
        evaluate(float(u), float(p))
    for _ in range(config.n_iter):
        x = np.array(xs)
        y = np.array(ys)
        spread = y.std()
        fresh = np.min(np.abs(candidates[:, None] - x[None, :]), axis=1) > 1e-12
        if not fresh.any():
            break
        if spread == 0:
            mu, sigma = np.zeros_like(candidates), np.ones_like(candidates)
            score = np.where(fresh, np.min(np.abs(candidates[:, None] - x[None, :]), axis=1), -np.inf)
        else:
            mu, sigma = _posterior(x, (y - y.mean()) / spread, candidates, config.noise_floor)
            best = (y.max() - y.mean()) / spread
            ei = expected_improvement(mu, sigma, best)
            score = np.where(fresh, ei, -np.inf)
            if not np.max(score) > 0:
                score = np.where(fresh, sigma, -np.inf)
        u = float(candidates[int(np.argmax(score))])
        evaluate(u, float(scale.to_price(u)))

    values = np.array(ys)
    if values.max() - values.min() <= 1e-12 * max(1.0, abs(values.max())):
        return OSPResult(lo + 0.5 * (hi - lo), float(values[0]), tuple(trace), degenerate=True)
    top = values.max()
    p_star = min(r.p for r in trace if r.objective == top)
    return OSPResult(p_star, float(top), tuple(trace))


def grid_search(objective: Callable[[float], float], lo: float, hi: float,
                resolution: float) -> tuple[float, float]:
    """Exhaustive maximization on ``lo, lo + resolution, ...`` up to ``hi``.

    Grid prices are rounded to 10 decimals so nested grids share exact points.
    """
    if not resolution > 0:
        raise ConfigError("resolution must be positive")
    n = int(math.floor((hi - lo) / resolution + 1e-9))
    best_p, best_n = None, -math.inf
    for k in range(n + 1):
        p = round(lo + k * resolution, 10)
        value = objective(p)
        if value > best_n:
            best_p, best_n = p, value
    return best_p, float(best_n)


def _objective(year: UserYear, battery: BatteryParams | None):
    return lambda p: year.run(Mode.OSP, p, battery=battery).net


def optimize_osp(profile: UserProfile, prices: PriceSeries, calendar: WorkCalendar,
                 scenario_template: ScenarioConfig, config: OptimizerConfig = OptimizerConfig(),
                 initial: Sequence[float] | None = None) -> OSPResult:
    year = UserYear(profile, prices, calendar, scenario_template)
    return optimize_user_year(year, config, initial=initial)


def optimize_user_year(year: UserYear, config: OptimizerConfig, battery: BatteryParams | None = None,
                       initial: Sequence[float] | None = None) -> OSPResult:
    lo, hi = price_bounds(year.prices, config)
    seed = np.random.SeedSequence([config.seed, year.profile.rng_seed])
    return bayes_maximize(_objective(year, battery), lo, hi, config, initial=initial, seed=seed,
                          scale=QuantileScale(year.prices, lo, hi))


def grid_search_osp(profile: UserProfile, prices: PriceSeries, calendar: WorkCalendar,
                    scenario_template: ScenarioConfig, resolution: float,
                    config: OptimizerConfig = OptimizerConfig()) -> tuple[float, float]:
    year = UserYear(profile, prices, calendar, scenario_template)
    lo, hi = price_bounds(year.prices, config)
    return grid_search(_objective(year, None), lo, hi, resolution)
