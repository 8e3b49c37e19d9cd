"""Stochastic simulator of vehicle-to-grid economics for commuter populations."""

from .battery import BatteryParams, BatteryState, DegradationParams
from .engine import AnnualResult, Mode, ScenarioConfig, UserYear, simulate_year
from .optimizer import OptimizerConfig, optimize_osp
from .population import UserProfile, sample_population, sample_user
from .timeseries import PriceSeries, WorkCalendar, parse_price_csv, smooth_prices

__version__ = "0.1.0"

__all__ = [
    "AnnualResult", "BatteryParams", "BatteryState", "DegradationParams", "Mode",
    "OptimizerConfig", "PriceSeries", "ScenarioConfig", "UserProfile", "UserYear",
    "WorkCalendar", "optimize_osp", "parse_price_csv", "sample_population", "sample_user",
    "simulate_year", "smooth_prices",
]
