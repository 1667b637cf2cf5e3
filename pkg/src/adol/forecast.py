"""Load forecasting models trained under three interchangeable losses.

The losses share one interface, (predictions, truths) -> (mean loss,
gradient of the mean loss w.r.t. predictions), so the same training
loop drives all of them:

  MseLoss        plain regression; never touches a solver.
  SurrogateLoss  frozen cost surrogate evaluated at (error, params);
                 gradient comes from the surrogate's input gradient.
                 Never touches a solver either: that is the point.
  DecisionLoss   absolute deviation of the realized two-stage cost from
                 the perfect-forecast cost, differentiated by central
                 finite differences; every probe solves the dispatch,
                 which the dispatch_solves counter makes visible.

Forecast features are lagged loads plus cyclic calendar encodings.
"""

import time as _time
from dataclasses import dataclass, field

import numpy as np

from adol import case1, case2
from adol.neural import Mlp, TrainConfig, fit


class InsufficientHistory(ValueError):
    """Series is shorter than the deepest requested lag."""


class SolverBudgetExceeded(RuntimeError):
    """DecisionLoss hit its dispatch-solve budget."""


@dataclass
class FeatureSpec:
    lags: tuple = (1, 24, 168)
    calendar: bool = True
    include_extras: bool = True


@dataclass
class FeatureTable:
    timestamps: np.ndarray
    features: np.ndarray
    targets: np.ndarray
    feature_names: list


def _hour_of_day(timestamps):
    return (
        timestamps.astype("datetime64[h]") - timestamps.astype("datetime64[D]")
    ).astype(int)


def _day_of_week(timestamps):
    days = timestamps.astype("datetime64[D]").astype(int)
    return (days + 3) % 7  # epoch day 0 was a Thursday


def build_features(series, spec=None):
    """Feature rows for per-hour forecasting.

    One row per hour from the deepest lag onward: lagged loads, cyclic
    hour-of-day and day-of-week encodings, and any extra numeric columns
    carried by the series.  Deterministic.
    """
    if spec is None:
        spec = FeatureSpec()
    loads = series.load
    n = loads.size
    max_lag = max(spec.lags) if spec.lags else 0
    if n - max_lag <= 0:
        raise InsufficientHistory(
            f"series has {n} hours but the deepest lag is {max_lag}"
        )
    rows = np.arange(max_lag, n)
    cols = []
    names = []
    for lag in spec.lags:
        cols.append(loads[rows - lag])
        names.append(f"lag_{lag}h")
    if spec.calendar:
        ts = series.timestamps[rows]
        hod = _hour_of_day(ts)
        dow = _day_of_week(ts)
        cols.append(np.sin(2 * np.pi * hod / 24.0))
        names.append("hod_sin")
        cols.append(np.cos(2 * np.pi * hod / 24.0))
        names.append("hod_cos")
        cols.append(np.sin(2 * np.pi * dow / 7.0))
        names.append("dow_sin")
        cols.append(np.cos(2 * np.pi * dow / 7.0))
        names.append("dow_cos")
    if spec.include_extras:
        for name in sorted(series.extras):
            cols.append(series.extras[name][rows])
            names.append(name)
    features = np.column_stack(cols) if cols else np.zeros((rows.size, 0))
    return FeatureTable(
        series.timestamps[rows].copy(), features, loads[rows].copy(), names
    )


class MseLoss:
    """Mean squared error; counts zero dispatch solves by construction."""

    dispatch_solves = 0

    def loss_and_grad(self, pred, truth):
        diff = pred - truth
        return float(np.mean(diff**2)), 2.0 * diff / diff.size


class SurrogateLoss:
    """Frozen cost-surrogate loss for forecaster training.

    Evaluates the surrogate at (prediction - truth, params) per
    instance; the mean predicted cost is the loss.  Changing `params`
    re-targets a new environment without touching the surrogate.
    """

    dispatch_solves = 0

    def __init__(self, net, params_vec):
        self.net = net
        self.params_vec = np.atleast_1d(np.asarray(params_vec, dtype=float))
        expected = net.input_dim - self.params_vec.size
        if expected < 1:
            raise ValueError("surrogate input smaller than the params block")
        self.error_dim = expected

    def loss_and_grad(self, pred, truth):
        pred = np.asarray(pred, dtype=float)
        n = pred.shape[0]
        err = (pred - truth).reshape(n, self.error_dim)
        U = np.hstack([err, np.tile(self.params_vec, (n, 1))])
        vals = self.net.forward(U)[:, 0]
        grads = self.net.grad_input(U)[:, : self.error_dim]
        return float(vals.mean()), (grads / n).reshape(pred.shape)


class DecisionLoss:
    """Cost deviation from the perfect-forecast decision, per instance:
    |c_total(forecast; truth) - c_total(truth; truth)|.

    The gradient comes from central finite differences over the forecast
    coordinates, so every probe solves the two-stage dispatch; the
    dispatch_solves counter records each evaluation.  Perfect-forecast
    costs are cached per truth value.
    """

    def __init__(self, params, case=1, step_fraction=0.005, typical=None,
                 max_solves=None, opts=None):
        self.params = params
        self.case = case
        self.step_fraction = step_fraction
        self.typical = typical
        self.max_solves = max_solves
        self.opts = opts
        self.dispatch_solves = 0
        self._perfect_cache = {}

    def _evaluate(self, forecast, truth):
        self.dispatch_solves += 1
        if self.max_solves is not None and self.dispatch_solves > self.max_solves:
            raise SolverBudgetExceeded(
                f"decision loss exceeded {self.max_solves} dispatch solves"
            )
        if self.case == 1:
            return case1.evaluate_two_stage(
                float(forecast[0]), float(truth[0]), self.params, self.opts
            ).total
        return case2.evaluate_two_stage_case2(
            forecast, truth, self.params, self.opts
        ).total

    def _perfect(self, truth):
        key = tuple(np.round(truth, 9))
        if key not in self._perfect_cache:
            self._perfect_cache[key] = self._evaluate(truth, truth)
        return self._perfect_cache[key]

    def loss_and_grad(self, pred, truth):
        pred = np.asarray(pred, dtype=float)
        truth = np.asarray(truth, dtype=float)
        n, width = pred.shape
        base = self.typical if self.typical is not None else np.mean(truth)
        h = self.step_fraction * float(np.mean(base))
        losses = np.zeros(n)
        grads = np.zeros_like(pred)
        for i in range(n):
            cp = self._perfect(truth[i])
            for j in range(width):
                up = pred[i].copy()
                dn = pred[i].copy()
                up[j] += h
                dn[j] -= h
                loss_up = abs(self._evaluate(up, truth[i]) - cp)
                loss_dn = abs(self._evaluate(dn, truth[i]) - cp)
                grads[i, j] = (loss_up - loss_dn) / (2 * h)
                if j == 0:
                    losses[i] = 0.5 * (loss_up + loss_dn)
        return float(losses.mean()), grads / n


def make_loss(kind, **kwargs):
    """Loss factory for the CLI: kind is "mse", "adol", or "dl"."""
    if kind == "mse":
        return MseLoss()
    if kind == "adol":
        return SurrogateLoss(kwargs["surrogate"], kwargs["params_vec"])
    if kind == "dl":
        return DecisionLoss(
            kwargs["params"],
            case=kwargs.get("case", 1),
            step_fraction=kwargs.get("step_fraction", 0.005),
            typical=kwargs.get("typical"),
            max_solves=kwargs.get("max_solves"),
        )
    raise ValueError(f"unknown loss kind {kind!r}")


@dataclass
class TrainingReport:
    history: list
    wall_time: float
    dispatch_solves: int


def train_forecaster(table, loss, cfg=None, hidden=(100,)):
    """Train an MLP forecaster on a FeatureTable under the given loss.

    Returns (net, TrainingReport).  The report's dispatch_solves comes
    from the loss object's counter and must be zero for MseLoss and
    SurrogateLoss.
    """
    if cfg is None:
        cfg = TrainConfig()
    X = table.features
    y = table.targets
    out_dim = 1 if y.ndim == 1 else y.shape[1]
    net = Mlp([X.shape[1], *hidden, out_dim], seed=cfg.seed)
    if isinstance(loss, MseLoss):
        loss_fn = None  # the fast built-in MSE path
    else:
        loss_fn = loss.loss_and_grad
    before = getattr(loss, "dispatch_solves", 0)
    t0 = _time.perf_counter()
    trained, history = fit(net, X, y, cfg, loss_and_grad=loss_fn)
    wall = _time.perf_counter() - t0
    solves = getattr(loss, "dispatch_solves", 0) - before
    return trained, TrainingReport(history, wall, solves)


def predict(net, table_or_features):
    """Forecasts in physical units; accepts a FeatureTable or a matrix."""
    X = (
        table_or_features.features
        if isinstance(table_or_features, FeatureTable)
        else np.asarray(table_or_features, dtype=float)
    )
    out = net.forward(X)
    return out[:, 0] if out.shape[1] == 1 else out


class Forecaster:
    """sklearn-style estimator around train_forecaster.

    `loss` is "mse" or a loss object (SurrogateLoss / DecisionLoss);
    after fit() the trained net is in net_, the loss history in
    history_, and solver usage in dispatch_solves_.
    """

    def __init__(self, loss="mse", hidden_layer_sizes=(100,),
                 learning_rate=1e-3, iterations=5000, batch_size=128,
                 seed=0, optimizer="adam", lr_decay=1.0):
        self.loss = loss
        self.hidden_layer_sizes = hidden_layer_sizes
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.batch_size = batch_size
        self.seed = seed
        self.optimizer = optimizer
        self.lr_decay = lr_decay

    def get_params(self, deep=True):
        return {
            "loss": self.loss,
            "hidden_layer_sizes": self.hidden_layer_sizes,
            "learning_rate": self.learning_rate,
            "iterations": self.iterations,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "optimizer": self.optimizer,
            "lr_decay": self.lr_decay,
        }

    def set_params(self, **params):
        known = self.get_params()
        for key, value in params.items():
            if key not in known:
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def _resolve_loss(self):
        return MseLoss() if self.loss == "mse" else self.loss

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        table = FeatureTable(
            np.arange(X.shape[0]), X, np.asarray(y, dtype=float), []
        )
        cfg = TrainConfig(
            learning_rate=self.learning_rate,
            iterations=self.iterations,
            batch_size=self.batch_size,
            seed=self.seed,
            optimizer=self.optimizer,
            lr_decay=self.lr_decay,
        )
        loss = self._resolve_loss()
        self.net_, report = train_forecaster(
            table, loss, cfg, hidden=self.hidden_layer_sizes
        )
        self.history_ = report.history
        self.wall_time_ = report.wall_time
        self.dispatch_solves_ = report.dispatch_solves
        return self

    def predict(self, X):
        if not hasattr(self, "net_"):
            raise RuntimeError("this Forecaster instance is not fitted yet")
        return predict(self.net_, np.asarray(X, dtype=float))
