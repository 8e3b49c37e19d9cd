import math
from dataclasses import replace

import numpy as np
import pytest

from v2gsim.battery import BatteryParams, DegradationParams
from v2gsim.engine import Mode, UserYear
from v2gsim.errors import ConfigError, MalformedRow, NonPositiveCost, TooFewPoints
from v2gsim.montecarlo import (
    CostProjection,
    StudyConfig,
    battery_cost_study,
    draw_population,
    fit_battery_cost,
    load_cost_history,
    run_population_study,
    summarize,
    sweep_efficiency_rate,
)
from v2gsim.optimizer import optimize_user_year
from v2gsim.population import (
    PopulationData,
    load_commute_distribution,
    load_ev_catalog,
    load_work_distribution,
)

SMALL = StudyConfig(city_id="t", population_size=12, master_seed=5)


def test_single_point_mass_user(inputs):
    data = PopulationData(
        load_commute_distribution("distance_miles,duration_hours,weight\n12,0.5,1\n"),
        load_work_distribution("arrival_hour,weight\n8,1\n", "hours_per_week,weight\n40,1\n"),
        load_ev_catalog("name,capacity_kwh,range_miles,sales_weight\nev,60,240,1\n"),
    )
    single = replace(inputs, population=data)
    study = run_population_study(replace(SMALL, population_size=1), single)
    user = study.population[0]
    year = UserYear(user, single.prices, single.calendar, single.scenario)
    base = year.run(Mode.COMMUTE_ONLY).net
    pt = study.distributions[Mode.PRICE_TAKER]
    assert pt.savings.tolist() == [year.run(Mode.PRICE_TAKER).net - base]
    osp = study.distributions[Mode.OSP]
    opt = optimize_user_year(year, single.optimizer)
    assert osp.savings.tolist() == [opt.n_star - base]
    assert osp.rows[0].p_star == opt.p_star
    assert osp.aggregates["mean"] == osp.aggregates["min"] == osp.aggregates["max"]


def test_study_deterministic_and_paired(inputs):
    a = run_population_study(SMALL, inputs)
    b = run_population_study(SMALL, inputs)
    for m in SMALL.scenarios:
        assert a.distributions[m].savings.tolist() == b.distributions[m].savings.tolist()
    pt, osp = (a.distributions[m].rows for m in (Mode.PRICE_TAKER, Mode.OSP))
    assert [r.profile for r in pt] == [r.profile for r in osp] == list(a.population)


def test_parallel_matches_serial(inputs):
    serial = run_population_study(SMALL, inputs, jobs=1)
    parallel = run_population_study(SMALL, inputs, jobs=2)
    for m in SMALL.scenarios:
        assert serial.distributions[m].rows == parallel.distributions[m].rows


def test_osp_mean_above_price_taker(inputs):
    study = run_population_study(replace(SMALL, population_size=200), inputs)
    assert study.distributions[Mode.OSP].mean > study.distributions[Mode.PRICE_TAKER].mean


def test_aggregates_recomputable():
    v = np.random.default_rng(0).normal(size=101)
    s = summarize(v)
    assert s["n"] == 101 and s["mean"] == float(np.mean(v))
    assert s["q50"] == float(np.median(v)) and s["min"] == v.min() and s["max"] == v.max()
    assert s["q25"] == float(np.sort(v)[25]) and s["q75"] == float(np.sort(v)[75])


def test_degenerate_sweep_equals_base_study(inputs):
    users = draw_population(SMALL, inputs)
    cells = sweep_efficiency_rate(SMALL, inputs, [0.837], [11.5], population=users)
    study = run_population_study(replace(SMALL, scenarios=(Mode.OSP,)), inputs, population=users)
    assert len(cells) == 1
    assert cells[0].mean == pytest.approx(study.distributions[Mode.OSP].mean, rel=1e-12)


def test_sweep_monotone_small(inputs):
    cells = sweep_efficiency_rate(replace(SMALL, population_size=30), inputs)
    grid = {(c.eta, c.r_ch): c.mean for c in cells}
    assert len(grid) == 9
    for r in SMALL.rate_values:
        means = [grid[(e, r)] for e in SMALL.eta_values]
        assert means == sorted(means)
    for e in SMALL.eta_values:
        means = [grid[(e, r)] for r in SMALL.rate_values]
        assert means == sorted(means)


def test_fit_recovers_exact_exponential():
    k = 0.12
    history = [(y, 156.0 * math.exp(-k * (y - 2019))) for y in range(2010, 2020)]
    proj = fit_battery_cost(history)
    assert proj.a == pytest.approx(156.0, rel=1e-9)
    assert proj.k == pytest.approx(k, rel=1e-9)
    assert proj.y0 == 2019
    for y, c in history:
        assert proj.cost(y) == pytest.approx(c, rel=1e-9)


def test_projection_strictly_decreasing():
    years = CostProjection(156.0, 0.1, 2019).projection(2020, 2050)
    assert [y for y, _ in years] == list(range(2020, 2051))
    costs = [c for _, c in years]
    assert all(a > b > 0 for a, b in zip(costs, costs[1:]))


def test_fit_errors():
    with pytest.raises(TooFewPoints):
        fit_battery_cost([(2018, 180.0), (2019, 156.0)])
    with pytest.raises(NonPositiveCost):
        fit_battery_cost([(2017, 200.0), (2018, 0.0), (2019, 156.0)])


def test_load_cost_history():
    h = load_cost_history(b"year,cost_usd_per_kwh\n2018,181\n2019,156\n")
    assert h == [(2018, 181.0), (2019, 156.0)]
    with pytest.raises(MalformedRow):
        load_cost_history(b"yr,cost\n2019,1\n")
    with pytest.raises(MalformedRow):
        load_cost_history(b"year,cost_usd_per_kwh\n2019,abc\n")


def test_cost_study_flat_without_degradation(inputs):
    flat = replace(inputs, scenario=replace(inputs.scenario, degradation=DegradationParams(b1=0.0, c1=0.0)))
    years = battery_cost_study(replace(SMALL, cost_years=(2020, 2030)), flat,
                               CostProjection(156.0, 0.1, 2019))
    assert len(years) == 11
    assert len({y.mean for y in years}) == 1


def test_cost_doubling_bounded_by_degradation_share(inputs):
    users = draw_population(SMALL, inputs)
    one = battery_cost_study(replace(SMALL, cost_years=(2020, 2020)), inputs,
                             CostProjection(156.0, 0.0, 2019), population=users)[0]
    two = battery_cost_study(replace(SMALL, cost_years=(2020, 2020)), inputs,
                             CostProjection(312.0, 0.0, 2019), population=users)[0]
    extra = []
    total = []
    for u in users:
        year = UserYear(u, inputs.prices, inputs.calendar, inputs.scenario)
        r = year.run(Mode.OSP, optimize_user_year(year, inputs.optimizer).p_star)
        extra.append(r.deg_cost - year.run(Mode.COMMUTE_ONLY).deg_cost)
        total.append(r.deg_cost)
    change = two.mean - one.mean
    # Doubling c_b can only cost the extra fade V2G adds (plus optimizer slack).
    assert change <= 1.0
    assert change >= -np.mean(extra) - 1.0
    assert abs(change) < np.mean(total)


def test_cost_study_rows(inputs):
    years = battery_cost_study(replace(SMALL, population_size=3), inputs,
                               CostProjection(156.0, 0.05, 2019))
    assert [y.year for y in years] == list(range(2020, 2051))
    assert all(a.c_b > b.c_b for a, b in zip(years, years[1:]))


@pytest.mark.parametrize("kwargs", [dict(population_size=0), dict(scenarios=(Mode.COMMUTE_ONLY,)),
                                    dict(eta_values=(1.2,)), dict(rate_values=(0.0,)),
                                    dict(cost_years=(2050, 2020)), dict(scenarios=("bogus",))])
def test_study_config_invariants(kwargs):
    with pytest.raises((ConfigError, ValueError)):
        StudyConfig(**kwargs)


def test_battery_param_sweep_values_validated(inputs):
    with pytest.raises(ConfigError):
        sweep_efficiency_rate(SMALL, inputs, [1.5], [11.5], population=[])
    assert BatteryParams(efficiency=0.99).efficiency == 0.99
