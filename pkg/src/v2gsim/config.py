"""Run configuration: one INI file naming the data files and every model constant."""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .battery import BatteryParams, DegradationParams
from .engine import Mode, ScenarioConfig
from .errors import ConfigError, V2GError
from .montecarlo import StudyConfig, StudyInputs, load_cost_history
from .optimizer import OptimizerConfig
from .population import (
    PopulationData,
    load_commute_distribution,
    load_ev_catalog,
    load_work_distribution,
)
from .timeseries import WorkCalendar, parse_price_csv

DATA_FILES = ("prices", "commute", "work_arrival", "work_hours", "ev_catalog", "battery_cost_history")


def default_config_path() -> Path:
    return Path(str(resources.files("v2gsim") / "data" / "default.cfg"))


@dataclass(frozen=True)
class RunConfig:
    paths: dict[str, Path]
    battery: BatteryParams
    degradation: DegradationParams
    optimizer: OptimizerConfig
    study: StudyConfig
    year: int
    reserve_legs: int
    min_charge_rate: float | None
    output_dir: Path
    source: Path

    @property
    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(Mode.OSP, 0.0, self.battery, self.degradation, self.year, self.reserve_legs)

    def echo(self) -> dict:
        """Plain-data view of the configuration for result files."""
        return {
            "paths": {k: str(v) for k, v in self.paths.items()},
            "battery": asdict(self.battery),
            "degradation": asdict(self.degradation),
            "optimizer": asdict(self.optimizer),
            "study": {**asdict(self.study), "scenarios": [m.value for m in self.study.scenarios]},
            "year": self.year,
            "reserve_legs": self.reserve_legs,
            "min_charge_rate": self.min_charge_rate,
        }


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path, encoding="utf-8")
        base = path.parent
        paths = {}
        for key in DATA_FILES:
            p = Path(parser.get("data", key))
            p = p if p.is_absolute() else base / p
            if not p.is_file():
                raise ConfigError(f"[data] {key}: file not found: {p}")
            paths[key] = p

        b = parser["battery"]
        battery = BatteryParams(
            capacity_kwh=b.getfloat("capacity_kwh", 60.0),
            dod=b.getfloat("dod"),
            efficiency=b.getfloat("efficiency"),
            charge_rate_kw=b.getfloat("charge_rate_kw"),
            discharge_rate_kw=b.getfloat("discharge_rate_kw"),
            capital_cost=b.getfloat("capital_cost"),
            saturation_factor=b.getfloat("saturation_factor"),
        )
        d = parser["degradation"]
        degradation = DegradationParams(*(d.getfloat(k) for k in ("b0", "b1", "z", "c0", "c1")))

        o = parser["optimizer"]
        p_max = o.get("p_max", "").strip()
        optimizer = OptimizerConfig(
            p_min=o.getfloat("p_min"),
            p_max=float(p_max) if p_max else None,
            p_max_quantile=o.getfloat("p_max_quantile", 1.0),
            n_init=o.getint("n_init"),
            n_iter=o.getint("n_iter"),
            noise_floor=o.getfloat("noise_floor"),
            seed=o.getint("seed"),
        )
        s = parser["study"]
        study = StudyConfig(
            city_id=s.get("city_id"),
            population_size=s.getint("population_size"),
            scenarios=tuple(Mode(m.strip()) for m in s.get("scenarios").split(",")),
            eta_values=_floats(s.get("eta_values")),
            rate_values=_floats(s.get("rate_values")),
            cost_years=(s.getint("cost_first_year"), s.getint("cost_last_year")),
            master_seed=s.getint("master_seed"),
        )
        min_rate = s.get("min_charge_rate", "").strip()
        out = Path(parser.get("output", "directory", fallback="results"))
        return RunConfig(
            paths=paths,
            battery=battery,
            degradation=degradation,
            optimizer=optimizer,
            study=study,
            year=s.getint("year"),
            reserve_legs=b.getint("reserve_legs", 1),
            min_charge_rate=float(min_rate) if min_rate else None,
            output_dir=out,
            source=path,
        )
    except V2GError:
        raise
    except (configparser.Error, KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_inputs(config: RunConfig) -> StudyInputs:
    p = config.paths
    prices = parse_price_csv(p["prices"].read_bytes(), config.study.city_id)
    population = PopulationData(
        load_commute_distribution(p["commute"].read_bytes()),
        load_work_distribution(p["work_arrival"].read_bytes(), p["work_hours"].read_bytes()),
        load_ev_catalog(p["ev_catalog"].read_bytes()),
    )
    return StudyInputs(prices, WorkCalendar.us_federal(config.year), population,
                       config.scenario, config.optimizer, config.min_charge_rate)


def load_history(config: RunConfig) -> list[tuple[int, float]]:
    return load_cost_history(config.paths["battery_cost_history"].read_bytes())
