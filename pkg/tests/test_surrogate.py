import numpy as np
import pytest

from adol.case1 import dynamic_param_vector, evaluate_two_stage, three_unit_system
from adol.neural import Mlp, TrainConfig, fit
from adol.surrogate import (
    SamplerConfig,
    ScenarioRecord,
    adol_loss_and_grad,
    label_scenarios,
    load_records,
    records_matrix,
    sample_scenarios,
    save_records,
    surrogate_error_scan,
    train_surrogate,
)


def test_gamma_zero_samples_equal_typical():
    cfg = SamplerConfig(gamma=0.0, beta=0.0, sample_count=50, seed=1)
    forecasts, params = sample_scenarios(1000.0, np.array([1.0, 2.0]), cfg)
    assert np.allclose(forecasts, 1000.0)
    assert np.allclose(params, [1.0, 2.0])


def test_sample_bounds_and_coverage():
    cfg = SamplerConfig(gamma=0.2, beta=0.1, sample_count=5000, seed=2)
    forecasts, params = sample_scenarios(1000.0, np.array([10.0]), cfg)
    assert forecasts.min() >= 800.0 and forecasts.max() <= 1200.0
    # empirical extremes approach the interval ends
    assert forecasts.min() < 802.0 and forecasts.max() > 1198.0
    assert params.min() >= 9.0 and params.max() <= 11.0


def test_sampling_deterministic():
    cfg = SamplerConfig(sample_count=10, seed=3)
    a = sample_scenarios(500.0, np.ones(3), cfg)
    b = sample_scenarios(500.0, np.ones(3), cfg)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_labeling_perfect_forecast_and_determinism():
    p = three_unit_system()
    w = dynamic_param_vector(p)
    ybar = 1000.0
    forecasts = np.array([[1000.0], [1000.0], [900.0]])
    params = np.tile(w, (3, 1))
    records = label_scenarios((forecasts, params), ybar, p, case=1)
    perfect = evaluate_two_stage(1000.0, 1000.0, p).total
    assert records[0].total_cost == pytest.approx(perfect, rel=1e-9)
    assert records[0].total_cost == records[1].total_cost
    assert records[0].error == pytest.approx([0.0])
    assert records[2].error == pytest.approx([-100.0])


def test_labeling_optimal_error_beats_perfect():
    p = three_unit_system()
    w = dynamic_param_vector(p)
    ybar = 1000.0
    su = p.reserve_fraction_up
    star = (1 - su / (1 + su)) * ybar
    forecasts = np.array([[ybar], [star]])
    params = np.tile(w, (2, 1))
    records = label_scenarios((forecasts, params), ybar, p, case=1)
    assert records[1].total_cost < records[0].total_cost


def test_labeling_failure_marker_keeps_batch():
    p = three_unit_system()
    w = dynamic_param_vector(p)
    forecasts = np.array([[1000.0], [99_000.0], [1100.0]])  # middle infeasible
    params = np.tile(w, (3, 1))
    records = label_scenarios((forecasts, params), 1000.0, p, case=1)
    assert records[0].ok and records[2].ok
    assert not records[1].ok
    assert np.isnan(records[1].total_cost)


def test_labeling_order_independent_of_workers():
    p = three_unit_system()
    w = dynamic_param_vector(p)
    cfg = SamplerConfig(sample_count=12, seed=4)
    samples = sample_scenarios(1000.0, w, cfg)
    serial = label_scenarios(samples, 1000.0, p, case=1, workers=1)
    parallel = label_scenarios(samples, 1000.0, p, case=1, workers=2)
    for a, b in zip(serial, parallel):
        assert a.total_cost == b.total_cost
        assert np.array_equal(a.error, b.error)


def test_records_csv_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    records = [
        ScenarioRecord(
            rng.normal(size=2), rng.normal(size=3), float(rng.normal()), bool(k % 7 == 0)
        )
        for k in range(20_000)
    ]
    path = tmp_path / "records.csv"
    save_records(records, path, header_comment="config_hash=abc seed=0")
    loaded = load_records(path)
    assert len(loaded) == len(records)
    for a, b in zip(records[:100], loaded[:100]):
        assert np.array_equal(a.error, b.error)
        assert np.array_equal(a.params, b.params)
        assert a.total_cost == b.total_cost
        assert a.shed_flag == b.shed_flag


def test_records_matrix_filters():
    good = ScenarioRecord(np.array([1.0]), np.array([]), 10.0, False)
    failed = ScenarioRecord(np.array([2.0]), np.array([]), np.nan, False)
    shed = ScenarioRecord(np.array([3.0]), np.array([]), 99.0, True)
    X, y = records_matrix([good, failed, shed])
    assert X.shape == (1, 1)
    X2, y2 = records_matrix([good, failed, shed], include_shed=True)
    assert X2.shape == (2, 1)


def test_surrogate_constant_target():
    rng = np.random.default_rng(6)
    records = [
        ScenarioRecord(rng.normal(size=1), rng.normal(size=2), 42.0, False)
        for _ in range(400)
    ]
    net, report = train_surrogate(
        records, hidden=(16,), cfg=TrainConfig(iterations=2000, seed=0)
    )
    assert report["holdout_mse"] < 1e-3


def test_surrogate_vee_target_argmin_location():
    # piecewise-linear cost with an asymmetric kink, like the dispatch sweep
    rng = np.random.default_rng(7)
    kink = -130.0
    errors = rng.uniform(-200.0, 200.0, size=4000)
    cost = np.where(
        errors < kink, 30_000 - 22 * (errors - kink), 30_000 + 6 * (errors - kink)
    )
    records = [
        ScenarioRecord(np.array([e]), np.zeros(0), float(c), False)
        for e, c in zip(errors, cost)
    ]
    net, report = train_surrogate(
        records, hidden=(64,), cfg=TrainConfig(iterations=8000, seed=1)
    )
    grid = np.linspace(-200.0, 200.0, 801)
    pred = net.forward(grid.reshape(-1, 1))[:, 0]
    best = grid[int(np.argmin(pred))]
    assert abs(best - kink) < 0.01 * 400.0  # within 1% of the input range


def test_adol_loss_finite_difference_agreement():
    rng = np.random.default_rng(8)
    net = Mlp([3, 12, 1], seed=2)
    x = rng.normal(size=(500, 3))
    y = (x**2).sum(axis=1)
    net, _ = fit(net, x, y, TrainConfig(iterations=1500, seed=0))
    forecast = np.array([0.3])
    truth = np.array([0.1])
    w = np.array([0.5, -0.2])
    loss, grad = adol_loss_and_grad(net, forecast, truth, w)
    h = 1e-5
    lp, _ = adol_loss_and_grad(net, forecast + h, truth, w)
    lm, _ = adol_loss_and_grad(net, forecast - h, truth, w)
    fd = (lp - lm) / (2 * h)
    denom = max(abs(fd), abs(grad[0]), 1.0)
    assert abs(grad[0] - fd) / denom < 1e-4


def test_surrogate_ignores_params_when_beta_zero():
    rng = np.random.default_rng(9)
    errors = rng.uniform(-100, 100, size=600)
    cost = 1000.0 + np.abs(errors) * 5.0
    const_w = np.array([7.0, 3.0])
    records = [
        ScenarioRecord(np.array([e]), const_w.copy(), float(c), False)
        for e, c in zip(errors, cost)
    ]
    net, _ = train_surrogate(
        records, hidden=(16,), cfg=TrainConfig(iterations=1000, seed=0)
    )
    l1, _ = adol_loss_and_grad(net, [10.0], [0.0], const_w)
    l2, _ = adol_loss_and_grad(net, [10.0], [0.0], const_w * 1.1)
    assert l1 == pytest.approx(l2, abs=1e-9)


def test_surrogate_error_scan_shape():
    net = Mlp([3, 4, 1], seed=0)
    out = surrogate_error_scan(net, np.array([1.0, 2.0]), 100.0, [-0.1, 0.0, 0.1])
    assert out.shape == (3,)
