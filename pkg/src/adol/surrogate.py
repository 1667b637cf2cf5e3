"""Scenario sampling, two-stage cost labeling, and the learned loss.

The pipeline: draw forecast/parameter scenarios around their typical
values, price each one by solving the two-stage dispatch with truth
fixed at the typical profile, then fit a network mapping (forecast
error, parameter vector) to total cost.  The trained network is used
directly as a training loss for forecasting models; its input gradient
with respect to the error coordinates is the loss gradient.

Labeling is embarrassingly parallel; records keep input order for any
worker count.  A failed solve is recorded as a NaN cost, never aborting
the batch.  Learning is one-off: when the dispatch parameters drift
within the sampled band, only the parameter input changes; nothing is
relabeled or retrained.
"""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from adol import case1, case2
from adol.neural import Mlp, TrainConfig, fit

SHED_TOL = 1e-6


@dataclass
class SamplerConfig:
    """gamma bounds the forecast band, beta the parameter band, both as
    fractions of the typical values."""

    gamma: float = 0.2
    beta: float = 0.1
    sample_count: int = 20_000
    seed: int = 0

    def validate(self):
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must lie in [0, 1)")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must lie in [0, 1)")
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")


@dataclass
class ScenarioRecord:
    """One labeled sample: forecast error against the typical profile,
    flattened dynamic parameters, and the realized two-stage cost.
    total_cost is NaN when the solve failed."""

    error: np.ndarray
    params: np.ndarray
    total_cost: float
    shed_flag: bool

    @property
    def ok(self):
        return bool(np.isfinite(self.total_cost))


def sample_scenarios(ybar, wbar, cfg):
    """Draw (forecast, params) pairs coordinatewise-uniform around the
    typical values: forecasts in [(1-gamma)*ybar, (1+gamma)*ybar] and
    params in [(1-beta)*wbar, (1+beta)*wbar].  Deterministic under seed.
    """
    cfg.validate()
    ybar = np.atleast_1d(np.asarray(ybar, dtype=float))
    wbar = np.atleast_1d(np.asarray(wbar, dtype=float))
    if np.any(ybar <= 0):
        raise ValueError("typical profile must be positive")
    rng = np.random.default_rng(cfg.seed)
    k = cfg.sample_count
    forecasts = rng.uniform(
        (1 - cfg.gamma) * ybar, (1 + cfg.gamma) * ybar, size=(k, ybar.size)
    )
    params = rng.uniform(
        (1 - cfg.beta) * wbar, (1 + cfg.beta) * wbar, size=(k, wbar.size)
    )
    return forecasts, params


def _label_one(args):
    yhat, wvec, ybar, base_params, case = args
    try:
        if case == 1:
            p = case1.with_dynamic_params(base_params, wvec)
            cb = case1.evaluate_two_stage(float(yhat[0]), float(ybar[0]), p)
        else:
            p = case2.with_dynamic_params(base_params, wvec)
            cb = case2.evaluate_two_stage_case2(yhat, ybar, p)
        return cb.total, bool(cb.shed > SHED_TOL)
    except Exception:
        return np.nan, False


def label_scenarios(samples, ybar, base_params, case=1, workers=1):
    """Price every sampled (forecast, params) pair with truth fixed at
    the typical profile.  Returns ScenarioRecords in input order."""
    forecasts, params = samples
    ybar = np.atleast_1d(np.asarray(ybar, dtype=float))
    jobs = [
        (forecasts[k], params[k], ybar, base_params, case)
        for k in range(forecasts.shape[0])
    ]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(jobs) // (workers * 8))
            results = list(pool.map(_label_one, jobs, chunksize=chunk))
    else:
        results = [_label_one(j) for j in jobs]
    records = []
    for k, (cost, shed) in enumerate(results):
        records.append(
            ScenarioRecord(forecasts[k] - ybar, params[k].copy(), cost, shed)
        )
    return records


def save_records(records, path, header_comment=None):
    """CSV schema: error_0..error_d, param_0..param_p, cost, shed_flag."""
    if not records:
        raise ValueError("no records to save")
    de = records[0].error.size
    dp = records[0].params.size
    cols = (
        [f"error_{i}" for i in range(de)]
        + [f"param_{i}" for i in range(dp)]
        + ["cost", "shed_flag"]
    )
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(cols)
        for r in records:
            writer.writerow(
                [f"{v!r}" for v in r.error.tolist()]
                + [f"{v!r}" for v in r.params.tolist()]
                + [f"{r.total_cost!r}", int(r.shed_flag)]
            )


def load_records(path):
    with open(path, newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader)
    de = sum(1 for c in header if c.startswith("error_"))
    dp = sum(1 for c in header if c.startswith("param_"))
    records = []
    for row in reader:
        vals = [float(v) for v in row[: de + dp + 1]]
        records.append(
            ScenarioRecord(
                np.array(vals[:de]),
                np.array(vals[de : de + dp]),
                vals[de + dp],
                bool(int(row[-1])),
            )
        )
    return records


def records_matrix(records, include_shed=False):
    """Stack usable records into (X, y) for surrogate training."""
    kept = [r for r in records if r.ok and (include_shed or not r.shed_flag)]
    if not kept:
        raise ValueError("no usable records (all failed or shed)")
    X = np.array([np.concatenate([r.error, r.params]) for r in kept])
    y = np.array([r.total_cost for r in kept])
    return X, y


def train_surrogate(records, hidden=(100,), cfg=None, holdout_fraction=0.1,
                    include_shed=False):
    """Fit the cost surrogate on labeled records.

    Records with a failure marker or (by default) a shed flag are
    excluded so value-of-lost-load penalties cannot dominate the fit.
    Returns (net, report); the report carries held-out MSE and MAPE.
    Input columns with zero variance (for example the parameter block
    when beta was 0) get their first-layer weights zeroed, making the
    surrogate exactly constant along those directions.
    """
    if cfg is None:
        cfg = TrainConfig(iterations=20_000, batch_size=256, lr_decay=0.01)
    X, y = records_matrix(records, include_shed=include_shed)
    n = X.shape[0]
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(n)
    n_hold = int(round(holdout_fraction * n))
    hold_idx = order[:n_hold]
    train_idx = order[n_hold:]
    net = Mlp([X.shape[1], *hidden, 1], activation="softplus", seed=cfg.seed)
    trained, history = fit(net, X[train_idx], y[train_idx], cfg)

    frozen = X.std(axis=0) < 1e-12
    if frozen.any():
        trained.weights[0][frozen, :] = 0.0

    report = {
        "train_count": int(train_idx.size),
        "holdout_count": int(hold_idx.size),
        "excluded_count": int(len(records) - n),
        "final_train_loss": history[-1][1] if history else np.nan,
    }
    if n_hold:
        pred = trained.forward(X[hold_idx])[:, 0]
        truth = y[hold_idx]
        report["holdout_mse"] = float(np.mean((pred - truth) ** 2))
        report["holdout_mape"] = float(
            np.mean(np.abs((pred - truth) / truth)) * 100.0
        )
    return trained, report


def adol_loss_and_grad(net, forecast, truth, params_vec):
    """Loss and d(loss)/d(forecast) from a frozen cost surrogate.

    The surrogate input is [forecast - truth, params]; the gradient is
    its input gradient restricted to the error coordinates, ready to be
    chained into a forecasting model.
    """
    forecast = np.atleast_1d(np.asarray(forecast, dtype=float))
    truth = np.atleast_1d(np.asarray(truth, dtype=float))
    params_vec = np.atleast_1d(np.asarray(params_vec, dtype=float))
    u = np.concatenate([forecast - truth, params_vec])
    loss = net.forward(u)
    grad = net.grad_input(u)[: forecast.size]
    return float(loss), grad


def surrogate_error_scan(net, params_vec, ybar, grid_fracs):
    """Evaluate the surrogate along the error axis (params held fixed).

    grid_fracs are error fractions of the typical profile; for a
    profile-valued ybar the whole profile is scaled together.  Returns
    the predicted costs, one per grid point.
    """
    ybar = np.atleast_1d(np.asarray(ybar, dtype=float))
    params_vec = np.atleast_1d(np.asarray(params_vec, dtype=float))
    rows = np.array(
        [np.concatenate([f * ybar, params_vec]) for f in grid_fracs]
    )
    return net.forward(rows)[:, 0]
