"""Desk-scale base predictors and finite model ensembles.

The stochastic training rule is always represented as a finite uniform
ensemble of parameter vectors: plain SGD gives a singleton, independently
seeded runs give an i.i.d. ensemble, and a positive noise temperature
turns the updates into Langevin dynamics whose post-burn-in snapshots form
the ensemble.  Two architectures are provided, both trained from scratch
with plain numpy: a multinomial logistic classifier and a fully connected
tanh network for bounded regression (predictions clipped into the target
interval).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataio import Dataset
from .scores import Discrete, Interval

__all__ = [
    "TrainConfig",
    "LogisticModel",
    "MlpRegressor",
    "ModelEnsemble",
    "train_classifier",
    "train_regressor",
    "draw_model",
    "predict",
    "ensemble_accuracy",
    "loss_and_gradient",
    "flat_params",
    "with_params",
    "save_ensemble",
    "load_ensemble",
]

ENSEMBLE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the training rule.

    ``noise_temperature`` 0 means plain mini-batch gradient descent and the
    ensemble consists of ``ensemble_size`` independently seeded runs; a
    positive temperature adds Gaussian noise scaled by
    sqrt(2 * learning_rate * temperature) to every update (Langevin
    dynamics) and the ensemble consists of snapshots taken after ``epochs``
    burn-in epochs, one every ``snapshot_stride`` epochs.  ``ensemble_size``
    also sets how many draws approximate model-averaged quantities such as
    the training c.d.f.; size 1 represents a deterministic learner.
    """

    kind: str = "logistic"
    hidden: tuple = (50, 50)
    learning_rate: float = 0.1
    epochs: int = 200
    batch_size: int = 32
    noise_temperature: float = 0.0
    ensemble_size: int = 16
    seed: int = 0
    snapshot_stride: int = 5

    def __post_init__(self):
        if self.kind not in ("logistic", "mlp"):
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if self.learning_rate <= 0 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("learning rate, epochs and batch size must be positive")
        if self.ensemble_size < 1 or self.snapshot_stride < 1:
            raise ValueError("ensemble size and snapshot stride must be positive")
        if self.noise_temperature < 0:
            raise ValueError("noise temperature must be nonnegative")


@dataclass(frozen=True, eq=False)
class LogisticModel:
    """Multinomial logistic classifier; calling it returns argmax labels."""

    weights: np.ndarray  # (d, k)
    bias: np.ndarray  # (k,)

    def logits(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.weights + self.bias

    def __call__(self, X: np.ndarray) -> np.ndarray:
        # np.argmax breaks ties toward the lowest index.
        return np.argmax(self.logits(np.atleast_2d(X)), axis=1)


@dataclass(frozen=True, eq=False)
class MlpRegressor:
    """Fully connected tanh network; calling it returns clipped outputs."""

    weights: tuple  # of (fan_in, fan_out) arrays
    biases: tuple  # of (fan_out,) arrays
    lo: float
    hi: float

    def raw(self, X: np.ndarray) -> np.ndarray:
        h = np.atleast_2d(np.asarray(X, dtype=float))
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.tanh(h)
        return h[:, 0]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return np.clip(self.raw(X), self.lo, self.hi)


@dataclass(frozen=True)
class ModelEnsemble:
    """A finite uniform ensemble representing the training rule's output."""

    members: tuple
    kind: str
    config: TrainConfig
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.members) == 0:
            raise ValueError("ensemble must be nonempty")

    @property
    def size(self) -> int:
        return len(self.members)


def draw_model(ensemble: ModelEnsemble, rng: np.random.Generator):
    """Uniform draw from the ensemble (the single member when size is 1)."""
    if ensemble.size == 1:
        return ensemble.members[0]
    return ensemble.members[int(rng.integers(0, ensemble.size))]


def predict(model, x):
    """Point prediction: argmax label (classifier) or clipped real (regressor).

    Accepts a single feature vector or a matrix of rows; returns a scalar
    for a single vector.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    out = model(np.atleast_2d(x))
    if single:
        return out[0].item()
    return out


def ensemble_accuracy(ensemble: ModelEnsemble, X: np.ndarray, y: np.ndarray) -> float:
    """Average fraction of points classified correctly, over all members."""
    y = np.asarray(y)
    accs = [float(np.mean(m(X) == y)) for m in ensemble.members]
    return float(np.mean(accs))


def _logistic_loss_grad(weights, bias, X, y):
    logits = X @ weights + bias
    logits -= logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = X.shape[0]
    loss = -float(np.mean(np.log(probs[np.arange(n), y] + 1e-300)))
    delta = probs
    delta[np.arange(n), y] -= 1.0
    delta /= n
    return loss, X.T @ delta, delta.sum(axis=0)


def _mlp_forward(weights, biases, X):
    acts = [X]
    h = X
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        h = h @ w + b
        if i < last:
            h = np.tanh(h)
        acts.append(h)
    return acts


def _mlp_loss_grad(weights, biases, X, y):
    acts = _mlp_forward(weights, biases, X)
    out = acts[-1][:, 0]
    n = X.shape[0]
    resid = out - y
    loss = float(np.mean(resid**2))
    grad_w = [None] * len(weights)
    grad_b = [None] * len(weights)
    delta = (2.0 * resid / n)[:, None]
    for i in range(len(weights) - 1, -1, -1):
        grad_w[i] = acts[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (1.0 - acts[i] ** 2)
    return loss, grad_w, grad_b


def loss_and_gradient(model, X, y):
    """Training loss and its flattened analytic gradient at the model.

    Cross-entropy for the classifier, mean squared error (on the unclipped
    output) for the regressor.  The gradient layout matches
    :func:`flat_params`.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if isinstance(model, LogisticModel):
        y = np.asarray(y, dtype=int)
        loss, gw, gb = _logistic_loss_grad(model.weights, model.bias, X, y)
        return loss, np.concatenate([gw.ravel(), gb.ravel()])
    y = np.asarray(y, dtype=float)
    loss, gws, gbs = _mlp_loss_grad(model.weights, model.biases, X, y)
    return loss, np.concatenate([g.ravel() for pair in zip(gws, gbs) for g in pair])


def flat_params(model) -> np.ndarray:
    """Parameters flattened into one vector (pairs of weight, bias per layer)."""
    if isinstance(model, LogisticModel):
        return np.concatenate([model.weights.ravel(), model.bias.ravel()])
    return np.concatenate([g.ravel() for pair in zip(model.weights, model.biases) for g in pair])


def with_params(model, flat: np.ndarray):
    """A copy of the model with parameters taken from a flat vector."""
    flat = np.asarray(flat, dtype=float)
    if isinstance(model, LogisticModel):
        d, k = model.weights.shape
        return LogisticModel(weights=flat[: d * k].reshape(d, k).copy(), bias=flat[d * k :].copy())
    weights, biases = [], []
    pos = 0
    for w, b in zip(model.weights, model.biases):
        weights.append(flat[pos : pos + w.size].reshape(w.shape).copy())
        pos += w.size
        biases.append(flat[pos : pos + b.size].copy())
        pos += b.size
    return MlpRegressor(weights=tuple(weights), biases=tuple(biases), lo=model.lo, hi=model.hi)


def _sgd(model, X, y, cfg: TrainConfig, epochs: int, rng: np.random.Generator):
    n = X.shape[0]
    params = flat_params(model)
    current = model
    noise_scale = np.sqrt(2.0 * cfg.learning_rate * cfg.noise_temperature)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            _, grad = loss_and_gradient(current, X[batch], y[batch])
            params = params - cfg.learning_rate * grad
            if cfg.noise_temperature > 0:
                params = params + noise_scale * rng.standard_normal(params.size)
            current = with_params(current, params)
    return current


def _init_logistic(dim: int, k: int, rng: np.random.Generator) -> LogisticModel:
    scale = np.sqrt(2.0 / dim)
    return LogisticModel(weights=scale * rng.standard_normal((dim, k)), bias=np.zeros(k))


def _init_mlp(dim: int, hidden: tuple, lo: float, hi: float, rng: np.random.Generator) -> MlpRegressor:
    sizes = [dim, *hidden, 1]
    weights, biases = [], []
    last = len(sizes) - 2
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        if i == last:
            # Zero output head: the net starts as a constant, which speeds
            # up mean-matching and keeps early predictions in range.
            weights.append(np.zeros((fan_in, fan_out)))
        else:
            weights.append(np.sqrt(2.0 / fan_in) * rng.standard_normal((fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpRegressor(weights=tuple(weights), biases=tuple(biases), lo=lo, hi=hi)


def _train_ensemble(init_fn, X, y, cfg: TrainConfig, flags: dict) -> ModelEnsemble:
    members = []
    if cfg.noise_temperature > 0:
        # One Langevin chain; snapshots after burn-in, one per stride.
        rng = np.random.default_rng((cfg.seed, 0))
        model = _sgd(init_fn(rng), X, y, cfg, cfg.epochs, rng)
        members.append(model)
        for _ in range(cfg.ensemble_size - 1):
            model = _sgd(model, X, y, cfg, cfg.snapshot_stride, rng)
            members.append(model)
    else:
        for j in range(cfg.ensemble_size):
            rng = np.random.default_rng((cfg.seed, j))
            members.append(_sgd(init_fn(rng), X, y, cfg, cfg.epochs, rng))
    return ModelEnsemble(members=tuple(members), kind=cfg.kind, config=cfg, flags=flags)


def train_classifier(data: Dataset, cfg: TrainConfig) -> ModelEnsemble:
    """Train multinomial logistic model(s) on a discrete-label dataset.

    Deterministic given (data, cfg): member j of an independent-runs
    ensemble uses the RNG stream derived from (cfg.seed, j).  Degenerate
    single-class data trains but is flagged in ``ensemble.flags``.
    """
    if cfg.kind != "logistic":
        raise ValueError("train_classifier requires kind='logistic'")
    if not isinstance(data.space, Discrete):
        raise ValueError("classification needs a discrete label space")
    y = np.asarray(data.targets, dtype=int)
    flags = {}
    if np.unique(y).size < 2:
        warnings.warn("training data contains a single class", stacklevel=2)
        flags["single_class"] = True
    k = data.space.n_labels
    return _train_ensemble(lambda rng: _init_logistic(data.dim, k, rng), data.features, y, cfg, flags)


def train_regressor(data: Dataset, cfg: TrainConfig) -> ModelEnsemble:
    """Train tanh MLP regressor(s) on a bounded-interval dataset.

    Squared loss on the raw output; predictions are clipped into the
    target interval at prediction time.  Deterministic given (data, cfg).
    """
    if cfg.kind != "mlp":
        raise ValueError("train_regressor requires kind='mlp'")
    if not isinstance(data.space, Interval):
        raise ValueError("regression needs an interval label space")
    if len(cfg.hidden) == 0:
        raise ValueError("mlp needs at least one hidden layer")
    lo, hi = data.space.lo, data.space.hi
    y = np.asarray(data.targets, dtype=float)
    return _train_ensemble(
        lambda rng: _init_mlp(data.dim, tuple(cfg.hidden), lo, hi, rng), data.features, y, cfg, {}
    )


def _arrays_to_lists(model):
    if isinstance(model, LogisticModel):
        return {"weights": model.weights.tolist(), "bias": model.bias.tolist()}
    return {
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "lo": model.lo,
        "hi": model.hi,
    }


def save_ensemble(ensemble: ModelEnsemble, path) -> None:
    """Write the ensemble as versioned JSON (floats round-trip exactly)."""
    cfg = ensemble.config
    doc = {
        "version": ENSEMBLE_FORMAT_VERSION,
        "kind": ensemble.kind,
        "metadata": {
            "hidden": list(cfg.hidden),
            "learning_rate": cfg.learning_rate,
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "noise_temperature": cfg.noise_temperature,
            "ensemble_size": cfg.ensemble_size,
            "seed": cfg.seed,
            "snapshot_stride": cfg.snapshot_stride,
            "flags": ensemble.flags,
        },
        "members": [_arrays_to_lists(m) for m in ensemble.members],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_ensemble(path) -> ModelEnsemble:
    """Rebuild an ensemble from its JSON serialization."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("version") != ENSEMBLE_FORMAT_VERSION:
        raise ValueError(f"unsupported ensemble format version {doc.get('version')}")
    meta = doc["metadata"]
    cfg = TrainConfig(
        kind=doc["kind"],
        hidden=tuple(meta["hidden"]),
        learning_rate=meta["learning_rate"],
        epochs=meta["epochs"],
        batch_size=meta["batch_size"],
        noise_temperature=meta["noise_temperature"],
        ensemble_size=meta["ensemble_size"],
        seed=meta["seed"],
        snapshot_stride=meta["snapshot_stride"],
    )
    members = []
    for raw in doc["members"]:
        if doc["kind"] == "logistic":
            members.append(
                LogisticModel(weights=np.asarray(raw["weights"]), bias=np.asarray(raw["bias"]))
            )
        else:
            members.append(
                MlpRegressor(
                    weights=tuple(np.asarray(w) for w in raw["weights"]),
                    biases=tuple(np.asarray(b) for b in raw["biases"]),
                    lo=raw["lo"],
                    hi=raw["hi"],
                )
            )
    return ModelEnsemble(members=tuple(members), kind=doc["kind"], config=cfg, flags=meta.get("flags", {}))
