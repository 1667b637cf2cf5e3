import numpy as np
import pytest

from adol.case1 import (
    Case1Params,
    InfeasibleCapacity,
    build_day_ahead,
    dynamic_param_vector,
    evaluate_two_stage,
    solve_day_ahead,
    solve_real_time,
    three_unit_system,
    with_dynamic_params,
)
from adol.lp import solve_lp


@pytest.fixture
def params():
    return three_unit_system()


def test_day_ahead_merit_order_reference_point(params):
    # hand-computable optimum: merit order fills unit 1, remainder on 2;
    # up reserve on the cheapest unit with headroom, down on unit 1
    out = solve_day_ahead(1000.0, params)
    assert out.generation == pytest.approx([800.0, 200.0, 0.0], abs=1e-6)
    assert out.up_reserve == pytest.approx([0.0, 150.0, 0.0], abs=1e-6)
    assert out.down_reserve == pytest.approx([150.0, 0.0, 0.0], abs=1e-6)
    assert out.cost == pytest.approx(32_690.0, abs=1e-6)


def test_day_ahead_zero_load(params):
    out = solve_day_ahead(0.0, params)
    assert out.cost == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(out.generation, 0.0, atol=1e-9)


def test_day_ahead_no_reserves_single_unit():
    p = three_unit_system()
    p.reserve_fraction_up = 0.0
    p.reserve_fraction_down = 0.0
    out = solve_day_ahead(100.0, p)
    assert out.generation == pytest.approx([100.0, 0.0, 0.0], abs=1e-7)
    assert out.cost == pytest.approx(3000.0, abs=1e-7)


def test_day_ahead_balance_and_reserve_requirements(params):
    for load in (850.0, 1000.0, 1150.0):
        out = solve_day_ahead(load, params)
        tol = 1e-6 * load
        assert abs(out.generation.sum() - load) <= tol
        assert abs(out.up_reserve.sum() - 0.15 * load) <= tol
        assert abs(out.down_reserve.sum() - 0.15 * load) <= tol
        assert np.all(out.up_reserve + out.down_reserve <= params.gen_limit + tol)
        assert np.all(out.generation + out.up_reserve <= params.gen_limit + tol)
        assert np.all(out.generation - out.down_reserve >= -tol)


def test_infeasible_capacity_detected(params):
    with pytest.raises(InfeasibleCapacity):
        build_day_ahead(3000.0, params)


def test_real_time_perfect_forecast(params):
    da = solve_day_ahead(1000.0, params)
    rt = solve_real_time(1000.0, 1000.0, da.up_reserve, da.down_reserve, params)
    assert rt.cost == pytest.approx(0.0, abs=1e-8)
    assert rt.shed == pytest.approx(0.0, abs=1e-9)


def test_real_time_deficit_uses_reserve_before_quickstart(params):
    # 100 MW deficit against 150 MW of up reserve held on unit 2:
    # activation at 40 $/MWh beats quick-start at 60
    da = solve_day_ahead(1000.0, params)
    rt = solve_real_time(1100.0, 1000.0, da.up_reserve, da.down_reserve, params)
    assert rt.up_activation == pytest.approx([0.0, 100.0, 0.0], abs=1e-6)
    assert np.allclose(rt.quickstart, 0.0, atol=1e-8)
    assert rt.cost == pytest.approx(4000.0, abs=1e-6)


def test_real_time_surplus_refunds(params):
    # 100 MW surplus against 150 MW of down reserve on unit 1: refund at 30
    da = solve_day_ahead(1000.0, params)
    rt = solve_real_time(900.0, 1000.0, da.up_reserve, da.down_reserve, params)
    assert rt.down_activation == pytest.approx([100.0, 0.0, 0.0], abs=1e-6)
    assert rt.cost == pytest.approx(-3000.0, abs=1e-6)


def test_two_stage_perfect_forecast_is_stage1_only(params):
    cb = evaluate_two_stage(1000.0, 1000.0, params)
    assert cb.stage2 == pytest.approx(0.0, abs=1e-8)
    assert cb.total == pytest.approx(cb.stage1)


def test_two_stage_boundary_error_has_no_quickstart(params):
    # under-forecast sized so the deficit equals the procured up reserve
    y = 1000.0
    su = params.reserve_fraction_up
    f = su / (1 + su)
    forecast = (1 - f) * y
    da = solve_day_ahead(forecast, params)
    rt = solve_real_time(y, forecast, da.up_reserve, da.down_reserve, params)
    assert np.allclose(rt.quickstart, 0.0, atol=1e-6)
    assert rt.up_activation.sum() == pytest.approx(y - forecast, abs=1e-5)


def sweep_totals(params, y, errors):
    return np.array(
        [evaluate_two_stage((1 + e) * y, y, params).total for e in errors]
    )


def test_two_stage_piecewise_linear_with_reserve_kinks(params):
    y = 1000.0
    errors = np.arange(-0.20, 0.2001, 0.005)
    totals = sweep_totals(params, y, errors)
    second = np.abs(totals[2:] - 2 * totals[1:-1] + totals[:-2])
    su, sd = params.reserve_fraction_up, params.reserve_fraction_down
    kinks = [-su / (1 + su), 0.0, sd / (1 - sd)]
    step = 0.005
    for i, e in enumerate(errors[1:-1], start=1):
        near_kink = any(abs(e - k) <= step + 1e-12 for k in kinks)
        if not near_kink:
            assert second[i - 1] <= 1e-5, f"unexpected kink at {e:.3f}"


def test_two_stage_minimum_below_zero_error(params):
    y = 1000.0
    errors = np.arange(-0.20, 0.2001, 0.001)
    totals = sweep_totals(params, y, errors)
    best = errors[int(np.argmin(totals))]
    su = params.reserve_fraction_up
    assert abs(best - (-su / (1 + su))) < 0.0015
    # the perfect forecast is strictly more expensive than the optimum
    at_zero = totals[int(np.argmin(np.abs(errors)))]
    assert at_zero > totals.min()


def test_no_shed_within_sampling_band(params):
    y = 1000.0
    for e in np.linspace(-0.2, 0.2, 21):
        cb = evaluate_two_stage((1 + e) * y, y, params)
        assert cb.shed == pytest.approx(0.0, abs=1e-8)


def test_dynamic_param_round_trip(params):
    vec = dynamic_param_vector(params)
    assert vec.size == 12
    bumped = with_dynamic_params(params, vec * 1.1)
    assert bumped.energy_cost == pytest.approx(params.energy_cost * 1.1)
    assert bumped.down_reserve_cost == pytest.approx(params.down_reserve_cost * 1.1)
    # static fields untouched
    assert np.array_equal(bumped.gen_limit, params.gen_limit)
    assert np.array_equal(bumped.quickstart_limit, params.quickstart_limit)


def test_day_ahead_lp_status_optimal(params):
    sol = solve_lp(build_day_ahead(1000.0, params))
    assert sol.status == "optimal"
