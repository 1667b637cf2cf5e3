"""Minimal dense feed-forward network with exact backpropagation.

Gives analytic gradients with respect to both parameters (for training)
and inputs (for differentiating a frozen cost surrogate inside another
model's training loop).  Inputs and targets are standardized inside
fit(); the statistics live on the model, so forward() always works in
physical units and input gradients are chain-ruled through the scaling.

No GPU, no autodiff graph: two or three numpy matmuls per layer.
"""

import copy
from dataclasses import dataclass

import numpy as np


class ShapeMismatch(ValueError):
    """Input or target shape is inconsistent with the network."""


class NonFiniteLoss(RuntimeError):
    """Training diverged: the loss became NaN or infinite."""


def _softplus(z):
    return np.logaddexp(0.0, z)


def _softplus_prime(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


_ACTIVATIONS = {
    "softplus": (_softplus, _softplus_prime),
    "relu": (lambda z: np.maximum(z, 0.0), lambda z: (z > 0).astype(float)),
    "tanh": (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
}


@dataclass
class TrainConfig:
    """Gradient-descent settings; defaults suit standardized data.

    lr_decay is the total multiplicative decay applied exponentially
    over the run (1.0 keeps the step size constant)."""

    learning_rate: float = 1e-3
    iterations: int = 5000
    batch_size: int = 128
    seed: int = 0
    optimizer: str = "adam"
    lr_decay: float = 1.0
    log_every: int = 0  # 0 = auto (about 100 history points)
    normalize: bool = True

    def validate(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if not 0 < self.lr_decay <= 1:
            raise ValueError("lr_decay must lie in (0, 1]")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


class Mlp:
    """Dense feed-forward net: linear layers with one hidden activation,
    identity output.  Hidden activation is softplus by default so input
    gradients stay smooth everywhere.

    input_convex=True projects all weights past the first layer to be
    nonnegative after each training step, which with a convex activation
    makes the net convex in its input.  Off by default: an unconstrained
    MLP is not convex in general, and nothing here relies on it.
    """

    def __init__(self, layer_sizes, activation="softplus", seed=0,
                 input_convex=False):
        if len(layer_sizes) < 2:
            raise ShapeMismatch("need at least input and output sizes")
        if activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.layer_sizes = [int(s) for s in layer_sizes]
        self.activation = activation
        self.input_convex = bool(input_convex)
        rng = np.random.default_rng(seed)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            s = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-s, s, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        d, m = self.layer_sizes[0], self.layer_sizes[-1]
        self.input_offset = np.zeros(d)
        self.input_scale = np.ones(d)
        self.output_offset = np.zeros(m)
        self.output_scale = np.ones(m)

    @property
    def input_dim(self):
        return self.layer_sizes[0]

    @property
    def output_dim(self):
        return self.layer_sizes[-1]

    def _check_input(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if single:
            x = x.reshape(1, -1)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ShapeMismatch(
                f"expected inputs of width {self.input_dim}, got {x.shape}"
            )
        return x, single

    def _core_forward(self, xn):
        """Returns (pre-activations, activations); activations[0] is the
        normalized input, activations[-1] the normalized output."""
        act, _ = _ACTIVATIONS[self.activation]
        zs = []
        acts = [xn]
        a = xn
        last = len(self.weights) - 1
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            zs.append(z)
            a = act(z) if l < last else z
            acts.append(a)
        return zs, acts

    def forward(self, x):
        """Evaluate the network in physical units.  Accepts a single
        vector (returns a vector, or scalar for one output) or a batch."""
        x, single = self._check_input(x)
        xn = (x - self.input_offset) / self.input_scale
        _, acts = self._core_forward(xn)
        out = acts[-1] * self.output_scale + self.output_offset
        if not np.all(np.isfinite(out)):
            raise NonFiniteLoss("forward pass produced non-finite values")
        if single:
            out = out[0]
            if self.output_dim == 1:
                return float(out[0])
        return out

    def _backprop(self, zs, acts, delta):
        """Gradients for every layer given dLoss/d(normalized output)."""
        _, dact = _ACTIVATIONS[self.activation]
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        for l in range(len(self.weights) - 1, -1, -1):
            grads_w[l] = acts[l].T @ delta
            grads_b[l] = delta.sum(axis=0)
            if l > 0:
                delta = (delta @ self.weights[l].T) * dact(zs[l - 1])
        input_delta = delta @ self.weights[0].T if self.weights else delta
        return grads_w, grads_b, input_delta

    def grad_params(self, x, targets):
        """Analytic gradient of mean squared error over the batch, in
        physical units.  Returns (list of dW, list of db)."""
        x, _ = self._check_input(x)
        t = np.asarray(targets, dtype=float)
        if t.ndim == 1:
            t = t.reshape(-1, self.output_dim)
        if t.shape != (x.shape[0], self.output_dim):
            raise ShapeMismatch(f"targets shape {t.shape} does not match")
        xn = (x - self.input_offset) / self.input_scale
        zs, acts = self._core_forward(xn)
        pred = acts[-1] * self.output_scale + self.output_offset
        upstream = 2.0 * (pred - t) / t.size
        delta = upstream * self.output_scale
        gw, gb, _ = self._backprop(zs, acts, delta)
        return gw, gb

    def grad_output_backprop(self, x, upstream):
        """Parameter gradients for an arbitrary loss, given dLoss/doutput
        in physical units (used when a frozen surrogate supplies the
        training signal)."""
        x, _ = self._check_input(x)
        upstream = np.asarray(upstream, dtype=float).reshape(
            x.shape[0], self.output_dim
        )
        xn = (x - self.input_offset) / self.input_scale
        zs, acts = self._core_forward(xn)
        delta = upstream * self.output_scale
        gw, gb, _ = self._backprop(zs, acts, delta)
        return gw, gb

    def grad_input(self, x):
        """d(output)/d(input) in physical units.

        Scalar-output nets: returns the gradient, one row per input row
        (or a vector for a single input).  Multi-output nets: a Jacobian
        (output_dim x input_dim) for a single input only.
        """
        x, single = self._check_input(x)
        xn = (x - self.input_offset) / self.input_scale
        zs, acts = self._core_forward(xn)
        if self.output_dim == 1:
            upstream = np.ones((x.shape[0], 1))
            _, _, input_delta = self._backprop(zs, acts, upstream * self.output_scale)
            grad = input_delta / self.input_scale
            return grad[0] if single else grad
        if not single:
            raise ShapeMismatch("Jacobian only supported for a single input")
        rows = []
        for k in range(self.output_dim):
            upstream = np.zeros((1, self.output_dim))
            upstream[0, k] = 1.0
            _, _, input_delta = self._backprop(zs, acts, upstream * self.output_scale)
            rows.append(input_delta[0] / self.input_scale)
        return np.vstack(rows)

    def copy(self):
        return copy.deepcopy(self)


def normalize(values, offset, scale):
    return (np.asarray(values, dtype=float) - offset) / scale


def denormalize(values, offset, scale):
    return np.asarray(values, dtype=float) * scale + offset


def _safe_std(arr, axis=0):
    std = arr.std(axis=axis)
    return np.where(std < 1e-12, 1.0, std)


class _Adam:
    def __init__(self, shapes, lr):
        self.lr = lr
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params, grads):
        b1, b2, eps = 0.9, 0.999, 1e-8
        self.t += 1
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            mhat = m / (1 - b1 ** self.t)
            vhat = v / (1 - b2 ** self.t)
            p -= self.lr * mhat / (np.sqrt(vhat) + eps)


class _Sgd:
    def __init__(self, shapes, lr):
        self.lr = lr

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * g


def fit(net, x, targets, cfg=None, loss_and_grad=None):
    """Train a copy of `net`; the input instance is never mutated.

    loss_and_grad, when given, maps (predictions, targets) in physical
    units to (scalar loss, dLoss/dpredictions); None means mean squared
    error.  Returns (trained net, history) where history is a list of
    (iteration, loss) pairs.  Deterministic under cfg.seed.  Raises
    NonFiniteLoss as soon as the loss stops being finite.
    """
    if cfg is None:
        cfg = TrainConfig()
    cfg.validate()
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    t = np.asarray(targets, dtype=float)
    if t.ndim == 1:
        t = t.reshape(-1, 1)
    model = net.copy()
    if x.shape[1] != model.input_dim or t.shape[1] != model.output_dim:
        raise ShapeMismatch(
            f"data ({x.shape[1]} -> {t.shape[1]}) does not fit network "
            f"({model.input_dim} -> {model.output_dim})"
        )
    if cfg.iterations == 0:
        return model, []

    if cfg.normalize:
        model.input_offset = x.mean(axis=0)
        model.input_scale = _safe_std(x)
        model.output_offset = t.mean(axis=0)
        model.output_scale = _safe_std(t)

    params = model.weights + model.biases
    shapes = [p.shape for p in params]
    opt_cls = _Adam if cfg.optimizer == "adam" else _Sgd
    opt = opt_cls(shapes, cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    log_every = cfg.log_every or max(1, cfg.iterations // 100)
    history = []
    n = x.shape[0]
    batch = min(cfg.batch_size, n)

    for it in range(cfg.iterations):
        if cfg.lr_decay < 1.0 and cfg.iterations > 1:
            opt.lr = cfg.learning_rate * cfg.lr_decay ** (
                it / (cfg.iterations - 1)
            )
        idx = rng.integers(0, n, size=batch)
        xb, tb = x[idx], t[idx]
        xn = (xb - model.input_offset) / model.input_scale
        zs, acts = model._core_forward(xn)
        pred_n = acts[-1]
        if loss_and_grad is None:
            tn = (tb - model.output_offset) / model.output_scale
            diff = pred_n - tn
            loss = float(np.mean(diff**2) * np.mean(model.output_scale**2))
            delta = 2.0 * diff / diff.size
        else:
            pred = pred_n * model.output_scale + model.output_offset
            loss, gphys = loss_and_grad(pred, tb)
            loss = float(loss)
            delta = (
                np.asarray(gphys, dtype=float).reshape(pred.shape)
                * model.output_scale
            )
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"loss became non-finite at iteration {it}")
        gw, gb, _ = model._backprop(zs, acts, delta)
        opt.step(params, gw + gb)
        if model.input_convex:
            for W in model.weights[1:]:
                np.maximum(W, 0.0, out=W)
        if it % log_every == 0 or it == cfg.iterations - 1:
            history.append((it, loss))
    return model, history


def save_mlp(net, path):
    """Persist shapes, activation, normalization statistics, and
    parameters to a versioned .npz file."""
    payload = {
        "format_version": np.array(1),
        "layer_sizes": np.array(net.layer_sizes),
        "activation": np.array(net.activation),
        "input_convex": np.array(int(net.input_convex)),
        "input_offset": net.input_offset,
        "input_scale": net.input_scale,
        "output_offset": net.output_offset,
        "output_scale": net.output_scale,
    }
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        payload[f"weight_{i}"] = w
        payload[f"bias_{i}"] = b
    np.savez(path, **payload)


def load_mlp(path):
    with np.load(path, allow_pickle=False) as data:
        version = int(data["format_version"])
        if version != 1:
            raise ValueError(f"unsupported model format version {version}")
        net = Mlp(
            data["layer_sizes"].tolist(),
            activation=str(data["activation"]),
            input_convex=bool(int(data["input_convex"])),
        )
        net.weights = [
            data[f"weight_{i}"].copy() for i in range(len(net.weights))
        ]
        net.biases = [data[f"bias_{i}"].copy() for i in range(len(net.biases))]
        net.input_offset = data["input_offset"].copy()
        net.input_scale = data["input_scale"].copy()
        net.output_offset = data["output_offset"].copy()
        net.output_scale = data["output_scale"].copy()
    return net


class MlpRegressor:
    """sklearn-style wrapper: fit(X, y) / predict(X) with get_params so
    the net composes with model selection utilities."""

    def __init__(self, hidden_layer_sizes=(100,), activation="softplus",
                 learning_rate=1e-3, iterations=5000, batch_size=128,
                 seed=0, optimizer="adam"):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.activation = activation
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.batch_size = batch_size
        self.seed = seed
        self.optimizer = optimizer

    def get_params(self, deep=True):
        return {
            "hidden_layer_sizes": self.hidden_layer_sizes,
            "activation": self.activation,
            "learning_rate": self.learning_rate,
            "iterations": self.iterations,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "optimizer": self.optimizer,
        }

    def set_params(self, **params):
        for key, value in params.items():
            if key not in self.get_params():
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def _train_config(self):
        return TrainConfig(
            learning_rate=self.learning_rate,
            iterations=self.iterations,
            batch_size=self.batch_size,
            seed=self.seed,
            optimizer=self.optimizer,
        )

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        y = np.asarray(y, dtype=float)
        out_dim = 1 if y.ndim == 1 else y.shape[1]
        sizes = [X.shape[1], *self.hidden_layer_sizes, out_dim]
        net = Mlp(sizes, activation=self.activation, seed=self.seed)
        self.net_, self.loss_history_ = fit(net, X, y, self._train_config())
        self._vector_target_ = y.ndim > 1
        return self

    def predict(self, X):
        if not hasattr(self, "net_"):
            raise RuntimeError("this MlpRegressor instance is not fitted yet")
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        out = self.net_.forward(X)
        if not self._vector_target_:
            return out[:, 0]
        return out
