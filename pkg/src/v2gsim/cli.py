"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 infeasible population.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, default_config_path, load_history, load_inputs, load_run_config
from .engine import RESULT_COLUMNS, Mode, UserYear, result_row
from .errors import ConfigError, DataError, InfeasiblePopulation
from .montecarlo import (
    battery_cost_study,
    fit_battery_cost,
    run_population_study,
    sweep_efficiency_rate,
)
from .optimizer import optimize_user_year
from .population import sample_user
from .reports import csv_text, write_cost_study, write_study, write_sweep
from .timeseries import format_price_csv, parse_price_csv, smooth_prices

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INFEASIBLE = 0, 2, 3, 4


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _load(args) -> RunConfig:
    config = load_run_config(args.config)
    study = config.study
    if getattr(args, "population_size", None) is not None:
        study = replace(study, population_size=args.population_size)
    out = Path(args.out) if args.out is not None else config.output_dir
    if args.out is None and not out.is_absolute():
        out = Path.cwd() / out
    return replace(config, study=study, output_dir=out)


def _print_paths(paths):
    for p in paths:
        print(p)


def cmd_simulate(args) -> int:
    config = _load(args)
    inputs = load_inputs(config)
    mode = Mode(args.mode)
    if mode is Mode.OSP and args.p is not None and args.p < 0:
        raise ConfigError("--p must be non-negative")
    pop = inputs.population
    profile = sample_user(pop.commute, pop.work, pop.catalog, config.battery.dod,
                          args.user_seed, inputs.min_charge_rate)
    year = UserYear(profile, inputs.prices, inputs.calendar, inputs.scenario)
    p = None
    if mode is Mode.OSP:
        p = args.p if args.p is not None else optimize_user_year(year, config.optimizer).p_star
    result = year.run(mode, p)
    savings = result.net - year.run(Mode.COMMUTE_ONLY).net
    text = csv_text(RESULT_COLUMNS, [result_row(0, mode, p, result, savings)])
    sys.stdout.write(text)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    (config.output_dir / "simulate.csv").write_bytes(text.encode("utf-8"))
    return EXIT_OK


def cmd_study(args) -> int:
    config = _load(args)
    study = run_population_study(config.study, load_inputs(config), jobs=args.jobs)
    _print_paths(write_study(study, config.output_dir, config.echo()))
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load(args)
    cells = sweep_efficiency_rate(config.study, load_inputs(config), jobs=args.jobs)
    _print_paths([write_sweep(cells, config.output_dir)])
    return EXIT_OK


def cmd_cost_study(args) -> int:
    config = _load(args)
    projection = fit_battery_cost(load_history(config), last_year=config.study.cost_years[1])
    years = battery_cost_study(config.study, load_inputs(config), projection, jobs=args.jobs)
    _print_paths([write_cost_study(years, config.output_dir)])
    return EXIT_OK


def cmd_smooth(args) -> int:
    src = Path(args.prices)
    if not src.is_file():
        raise ConfigError(f"price file not found: {src}")
    series = parse_price_csv(src.read_bytes(), src.stem)
    smoothed = smooth_prices(series, args.window, args.order, mode=args.edge)
    out = Path(args.out) if args.out else src.with_name(f"{src.stem}_smoothed.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(format_price_csv(smoothed))
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="v2gsim", description="Stochastic V2G economics simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("config", nargs="?", default=str(default_config_path()),
                       help="run configuration file (default: bundled default.cfg)")
        p.add_argument("--out", default=None, help="output directory (overrides [output] directory)")
        return p

    def with_study(p):
        with_config(p)
        p.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1,
                       help="worker processes (default: available cores)")
        p.add_argument("--population-size", type=_positive_int, default=None,
                       help="number of users M (overrides [study] population_size)")
        return p

    p = with_config(sub.add_parser("simulate", help="one user-year"))
    p.add_argument("--user-seed", type=int, required=True, help="seed the user profile is sampled from")
    p.add_argument("--mode", choices=[m.value for m in Mode], required=True, help="operating scenario")
    p.add_argument("--p", type=float, default=None,
                   help="selling price threshold, $/kWh (osp only; optimized if omitted)")
    p.set_defaults(func=cmd_simulate)

    with_study(sub.add_parser("study", help="savings distribution per scenario")).set_defaults(func=cmd_study)
    with_study(sub.add_parser("sweep", help="efficiency x charging-rate grid")).set_defaults(func=cmd_sweep)
    with_study(sub.add_parser("cost-study", help="savings under projected battery costs")).set_defaults(
        func=cmd_cost_study)

    p = sub.add_parser("smooth", help="Savitzky-Golay smoothing of a price CSV")
    p.add_argument("prices", help="price CSV (timestamp,price_usd_per_kwh)")
    p.add_argument("--window", type=int, required=True, help="odd window length, hours")
    p.add_argument("--order", type=int, required=True, help="polynomial order, < window")
    p.add_argument("--edge", choices=("interp", "mirror"), default="interp", help="edge handling")
    p.add_argument("--out", default=None, help="output file (default: <prices>_smoothed.csv)")
    p.set_defaults(func=cmd_smooth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InfeasiblePopulation as exc:
        print(f"infeasible population: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
