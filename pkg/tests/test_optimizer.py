import numpy as np
import pytest

from v2gsim.engine import Mode, UserYear
from v2gsim.errors import ConfigError
from v2gsim.optimizer import (
    LinearScale,
    OptimizerConfig,
    QuantileScale,
    bayes_maximize,
    expected_improvement,
    grid_search,
    grid_search_osp,
    initial_design,
    optimize_osp,
    optimize_user_year,
    price_bounds,
)
from v2gsim.population import sample_population

from conftest import NO_FADE, make_profile, scenario, two_level_prices

CFG = OptimizerConfig()


def test_flat_objective_is_degenerate():
    res = bayes_maximize(lambda p: -3.5, 0.0, 0.4, CFG)
    assert res.degenerate
    assert res.n_star == -3.5
    assert res.p_star == pytest.approx(0.2)
    assert len(res.trace) == CFG.n_init + CFG.n_iter


def test_user_without_selling_hours_is_degenerate(calendar_2019):
    # No price in the search domain is exceeded, so the gate never opens.
    prices = two_level_prices(range(0, 3), low=0.05, high=0.05)
    res = optimize_osp(make_profile(), prices, calendar_2019, scenario(),
                       OptimizerConfig(p_min=0.05, p_max=0.4))
    assert res.degenerate


def test_two_level_plateau(calendar_2019):
    # Work 9-17; only 12-17 is expensive. Selling in the cheap morning hours
    # would use up headroom needed later, so the optimum is p in [0.02, 0.30).
    prices = two_level_prices(range(12, 17))
    sc = scenario(degradation=NO_FADE)
    res = optimize_osp(make_profile(), prices, calendar_2019, sc,
                       OptimizerConfig(p_max=0.4))
    plateau = UserYear(make_profile(), prices, calendar_2019, sc).run(Mode.OSP, 0.10).net
    assert 0.02 <= res.p_star < 0.30
    assert res.n_star == pytest.approx(plateau, rel=1e-12)


def test_returns_best_of_trace_with_smallest_p_tie_break():
    res = bayes_maximize(lambda p: -round(abs(p - 0.2), 2), 0.0, 1.0, CFG)
    best = max(r.objective for r in res.trace)
    assert res.n_star == best
    assert res.p_star == min(r.p for r in res.trace if r.objective == best)


def test_finds_smooth_maximum():
    res = bayes_maximize(lambda p: -(p - 0.37) ** 2, 0.0, 1.0, CFG)
    assert res.p_star == pytest.approx(0.37, abs=0.01)


def test_deterministic_given_seed():
    f = lambda p: np.sin(12 * p) * p  # noqa: E731
    a = bayes_maximize(f, 0.0, 1.0, CFG, seed=3)
    b = bayes_maximize(f, 0.0, 1.0, CFG, seed=3)
    assert a == b
    assert bayes_maximize(f, 0.0, 1.0, CFG, seed=4).trace != a.trace


def test_unpacks_as_triple():
    p, n, trace = bayes_maximize(lambda p: p, 0.0, 1.0, OptimizerConfig(n_iter=2))
    assert p == 1.0 and n == 1.0 and len(trace) == 8


def test_no_iterations_on_grid_equals_grid_search():
    f = lambda p: -abs(p - 0.013) + (0.002 if 0.05 < p < 0.06 else 0.0)  # noqa: E731
    grid = [round(0.001 * k, 10) for k in range(101)]
    res = bayes_maximize(f, 0.0, 0.1, OptimizerConfig(n_iter=0), initial=grid)
    assert (res.p_star, res.n_star) == grid_search(f, 0.0, 0.1, 0.001)


def test_grid_three_points():
    values = {0.0: 1.0, 0.5: 3.0, 1.0: 2.0}
    assert grid_search(lambda p: values[p], 0.0, 1.0, 0.5) == (0.5, 3.0)


def test_grid_plateau_tie_break():
    assert grid_search(lambda p: 1.0 if p >= 0.3 else 0.0, 0.0, 1.0, 0.1) == (0.3, 1.0)


def test_grid_nested_refinement(inputs):
    u = sample_population(1, inputs.population, 0.9, master_seed=12, min_charge_rate=3.3)[0]
    year = UserYear(u, inputs.prices, inputs.calendar, scenario())
    f = lambda p: year.run(Mode.OSP, p).net  # noqa: E731
    hi = float(year.prices.max())
    bests = [grid_search(f, 0.0, hi, r)[1] for r in (0.016, 0.008, 0.004, 0.002, 0.001)]
    assert all(a <= b for a, b in zip(bests, bests[1:]))


def test_grid_rejects_bad_resolution():
    with pytest.raises(ConfigError):
        grid_search(lambda p: p, 0.0, 1.0, 0.0)


def test_bo_close_to_grid_on_sample(inputs):
    users = sample_population(10, inputs.population, 0.9, master_seed=21, min_charge_rate=3.3)
    gaps = []
    for u in users:
        res = optimize_osp(u, inputs.prices, inputs.calendar, inputs.scenario, CFG)
        _, best = grid_search_osp(u, inputs.prices, inputs.calendar, inputs.scenario, 0.001, CFG)
        gaps.append(best - res.n_star)
    assert sum(g <= 1.0 for g in gaps) >= 9


def test_osp_beats_price_taker_and_slack(inputs):
    for u in sample_population(30, inputs.population, 0.9, master_seed=31, min_charge_rate=3.3):
        year = UserYear(u, inputs.prices, inputs.calendar, inputs.scenario)
        base = year.run(Mode.COMMUTE_ONLY).net
        res = optimize_user_year(year, CFG)
        assert res.n_star - base >= year.run(Mode.PRICE_TAKER).net - base
        assert res.n_star - base >= -1.0


def test_price_bounds():
    prices = np.array([0.0, 0.1, 0.2, 0.4])
    assert price_bounds(prices, CFG) == (0.0, 0.4)
    assert price_bounds(prices, OptimizerConfig(p_max=0.3)) == (0.0, 0.3)
    lo, hi = price_bounds(prices, OptimizerConfig(p_max_quantile=0.5))
    assert hi == pytest.approx(0.15)
    assert price_bounds(np.zeros(4), CFG)[1] > 0.0


def test_scales_are_monotone_and_inverse():
    prices = np.random.default_rng(0).gamma(2.0, 0.02, 500)
    for scale in (LinearScale(0.0, 0.3), QuantileScale(prices, 0.0, 0.3)):
        u = np.linspace(0, 1, 101)
        p = scale.to_price(u)
        assert p[0] == pytest.approx(0.0) and p[-1] == pytest.approx(0.3)
        assert np.all(np.diff(p) >= 0)
        np.testing.assert_allclose(scale.to_unit(p), u, atol=1e-9)


def test_initial_design_includes_endpoints():
    x = initial_design(6, 0)
    assert x[:2].tolist() == [0.0, 1.0] and x.size == 6
    assert np.all((x >= 0) & (x <= 1))


def test_expected_improvement_nonnegative():
    mu = np.linspace(-2, 2, 50)
    ei = expected_improvement(mu, np.full(50, 0.3), best=0.5)
    assert np.all(ei >= 0) and np.all(np.diff(ei) > 0)


@pytest.mark.parametrize("kwargs", [dict(n_init=1), dict(n_iter=-1), dict(p_min=0.2, p_max=0.1),
                                    dict(p_max_quantile=0), dict(noise_floor=0)])
def test_config_invariants(kwargs):
    with pytest.raises(ConfigError):
        OptimizerConfig(**kwargs)
