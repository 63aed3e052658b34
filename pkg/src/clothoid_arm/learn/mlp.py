"""Fully connected ReLU networks trained with Adam on a mean-absolute-error loss."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from clothoid_arm.errors import ConfigError, DataError, DivergenceError, SchemaVersionMismatch

MODEL_FORMAT = "clothoid-arm-mlp/1"


@dataclass(frozen=True)
class Hyperparams:
    epochs: int = 200
    learning_rate: float = 0.001
    decay: float = 5e-6
    batch_size: int = 32
    seed: int = 42
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")
        if not (self.learning_rate > 0 and self.decay >= 0):
            raise ConfigError("learning rate must be positive and decay non-negative")


@dataclass(frozen=True)
class Normalizer:
    """Per-feature affine map x -> (x - offset) / scale onto [0, 1]."""

    offset: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> Normalizer:
        X = np.asarray(X, dtype=float)
        lo, hi = X.min(axis=0), X.max(axis=0)
        span = hi - lo
        # Constant features keep unit scale so the map stays invertible.
        return cls(lo, np.where(span > 0, span, 1.0))

    @classmethod
    def identity(cls, width: int) -> Normalizer:
        return cls(np.zeros(width), np.ones(width))

    def normalize(self, X):
        return (np.asarray(X, dtype=float) - self.offset) / self.scale

    def denormalize(self, Z):
        return np.asarray(Z, dtype=float) * self.scale + self.offset

    def to_dict(self) -> dict:
        return {"offset": self.offset.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> Normalizer:
        scale = np.array(d["scale"], dtype=float)
        if np.any(scale == 0):
            raise ConfigError("normalizer scale must be nonzero")
        return cls(np.array(d["offset"], dtype=float), scale)


@dataclass
class MlpModel:
    layer_sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input_norm: Normalizer
    output_norm: Normalizer
    role: str = "forward"
    order: int = 2
    seed: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> MlpModel:
        return replace(
            self,
            layer_sizes=list(self.layer_sizes),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            meta=dict(self.meta),
        )

    def forward_normalized(self, Z: np.ndarray) -> np.ndarray:
        h = np.asarray(Z, dtype=float)
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ W + b
            if i < last:
                h = np.maximum(h, 0.0)
        return h

    def predict(self, X) -> np.ndarray:
        """Raw features in, raw targets out."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.output_norm.denormalize(self.forward_normalized(self.input_norm.normalize(X)))

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "role": self.role,
            "order": self.order,
            "seed": self.seed,
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "input_norm": self.input_norm.to_dict(),
            "output_norm": self.output_norm.to_dict(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> MlpModel:
        if d.get("format") != MODEL_FORMAT:
            raise SchemaVersionMismatch(f"model format {d.get('format')!r}, expected {MODEL_FORMAT!r}")
        sizes = [int(n) for n in d["layer_sizes"]]
        weights = [np.array(w, dtype=float).reshape(a, b) for w, a, b in zip(d["weights"], sizes[:-1], sizes[1:])]
        biases = [np.array(b, dtype=float).reshape(n) for b, n in zip(d["biases"], sizes[1:])]
        return cls(
            sizes, weights, biases,
            Normalizer.from_dict(d["input_norm"]), Normalizer.from_dict(d["output_norm"]),
            role=d["role"], order=int(d["order"]), seed=int(d["seed"]), meta=dict(d.get("meta", {})),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> MlpModel:
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, (SchemaVersionMismatch, ConfigError)):
                raise
            raise DataError(f"{path}: unreadable model file ({exc})") from None


def mlp_init(layer_sizes, seed: int) -> MlpModel:
    """He-uniform weights in +-sqrt(6 / fan_in), zero biases."""
    sizes = [int(n) for n in layer_sizes]
    if len(sizes) < 2 or any(n < 1 for n in sizes):
        raise ConfigError(f"need at least two positive layer widths, got {layer_sizes!r}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(
        sizes, weights, biases,
        Normalizer.identity(sizes[0]), Normalizer.identity(sizes[-1]), seed=seed,
    )


def mae_loss_and_grads(model: MlpModel, Z: np.ndarray, T: np.ndarray):
    """MAE on normalized data and its gradient w.r.t. every weight and bias."""
    acts = [Z]
    pre = []
    h = Z
    last = len(model.weights) - 1
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        a = h @ W + b
        pre.append(a)
        h = np.maximum(a, 0.0) if i < last else a
        acts.append(h)
    diff = h - T
    loss = float(np.mean(np.abs(diff)))
    delta = np.sign(diff) / diff.size
    gW, gb = [None] * len(model.weights), [None] * len(model.weights)
    for i in range(last, -1, -1):
        gW[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (pre[i - 1] > 0)
    return loss, gW, gb


def train(model: MlpModel, X, Y, hyper: Hyperparams | None = None) -> tuple[MlpModel, list[float]]:
    """Fit normalizers on (X, Y), then run mini-batch Adam on the MAE loss.

    Returns a trained copy and the per-epoch mean training loss (normalized units).
    """
    hyper = hyper or Hyperparams()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.size == 0:
        raise DataError("training set is empty")
    Y = np.asarray(Y, dtype=float).reshape(len(X), -1)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise DataError("training data contains NaN or infinite values")
    if X.shape[1] != model.layer_sizes[0] or Y.shape[1] != model.layer_sizes[-1]:
        raise ConfigError(
            f"data shapes {X.shape[1]}->{Y.shape[1]} do not match network {model.layer_sizes}"
        )

    model = model.copy()
    model.input_norm = Normalizer.fit(X)
    model.output_norm = Normalizer.fit(Y)
    Z, T = model.input_norm.normalize(X), model.output_norm.normalize(Y)

    params = model.weights + model.biases
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    rng = np.random.default_rng(hyper.seed)
    n = len(Z)
    step = 0
    history = []
    for epoch in range(hyper.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, hyper.batch_size):
            idx = order[start : start + hyper.batch_size]
            loss, gW, gb = mae_loss_and_grads(model, Z[idx], T[idx])
            if not math.isfinite(loss):
                raise DivergenceError(f"training loss became {loss} at epoch {epoch}")
            total += loss * len(idx)
            lr = hyper.learning_rate / (1.0 + hyper.decay * step)
            step += 1
            b1t = 1.0 - hyper.beta1**step
            b2t = 1.0 - hyper.beta2**step
            for p, g, mi, vi in zip(params, gW + gb, m, v):
                mi *= hyper.beta1
                mi += (1.0 - hyper.beta1) * g
                vi *= hyper.beta2
                vi += (1.0 - hyper.beta2) * g * g
                p -= lr * (mi / b1t) / (np.sqrt(vi / b2t) + hyper.epsilon)
        history.append(total / n)
    if not all(np.all(np.isfinite(p)) for p in params):
        raise DivergenceError("non-finite weights after training")
    return model, history
