"""Forward (pressure, payload -> shape) and inverse (shape, pressure -> payload) models."""

from __future__ import annotations

import warnings
from typing import Sequence

import numpy as np

from clothoid_arm.errors import RoleMismatch
from clothoid_arm.learn.mlp import Hyperparams, MlpModel, mlp_init, train
from clothoid_arm.spiral import CurvaturePolynomial, ShapeRep

FORWARD_HIDDEN = (64, 32, 16)
INVERSE_HIDDEN = (16, 8)


def forward_features(records: Sequence) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([[r.pressure, r.payload] for r in records], dtype=float)
    Y = np.array([r.q for r in records], dtype=float)
    return X, Y


def inverse_features(records: Sequence) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([[*r.q, r.pressure] for r in records], dtype=float)
    Y = np.array([[r.payload] for r in records], dtype=float)
    return X, Y


def train_forward(records, order: int, length: float, hyper: Hyperparams | None = None):
    hyper = hyper or Hyperparams()
    X, Y = forward_features(records)
    model = mlp_init([2, *FORWARD_HIDDEN, order + 2], hyper.seed)
    model.role, model.order = "forward", order
    model, history = train(model, X, Y, hyper)
    model.meta = {"length_m": length, "input_min": X.min(axis=0).tolist(), "input_max": X.max(axis=0).tolist()}
    return model, history


def train_inverse(records, order: int, length: float, hyper: Hyperparams | None = None):
    hyper = hyper or Hyperparams()
    X, Y = inverse_features(records)
    model = mlp_init([order + 3, *INVERSE_HIDDEN, 1], hyper.seed)
    model.role, model.order = "inverse", order
    model, history = train(model, X, Y, hyper)
    model.meta = {"length_m": length, "payload_max": float(Y.max())}
    return model, history


def _require(model: MlpModel, role: str, order: int | None = None) -> None:
    if model.role != role:
        raise RoleMismatch(f"expected a {role} model, got role {model.role!r}")
    expected_out = model.order + 2 if role == "forward" else 1
    expected_in = 2 if role == "forward" else model.order + 3
    if model.layer_sizes[-1] != expected_out or model.layer_sizes[0] != expected_in:
        raise RoleMismatch(
            f"{role} model of order {model.order} has layer sizes {model.layer_sizes}"
        )
    if order is not None and order != model.order:
        raise RoleMismatch(f"model was trained for N={model.order}, requested N={order}")


def forward_predict(model: MlpModel, pressure: float, payload: float, order: int | None = None) -> ShapeRep:
    """Shape at ``pressure`` kPa and ``payload`` g; warns outside the training envelope."""
    _require(model, "forward", order)
    lo, hi = model.meta.get("input_min"), model.meta.get("input_max")
    if lo is not None and not (lo[0] <= pressure <= hi[0] and lo[1] <= payload <= hi[1]):
        warnings.warn(
            f"query (P={pressure}, W={payload}) lies outside the training envelope", RuntimeWarning, stacklevel=2
        )
    q = model.predict([[pressure, payload]])[0]
    return ShapeRep(CurvaturePolynomial(q[:-1]), float(q[-1]), float(model.meta["length_m"]))


def forward_predict_batch(model: MlpModel, inputs) -> np.ndarray:
    """Predicted q vectors for an (n, 2) array of (pressure, payload)."""
    _require(model, "forward")
    return model.predict(inputs)


def inverse_predict(model: MlpModel, shape: ShapeRep, pressure: float) -> float:
    """Payload in grams, clamped to [0, largest training payload]."""
    _require(model, "inverse", shape.order)
    w = float(model.predict([[*shape.kappa.coeffs, shape.theta0, pressure]])[0, 0])
    return min(max(w, 0.0), float(model.meta.get("payload_max", np.inf)))


def inverse_predict_batch(model: MlpModel, X) -> np.ndarray:
    _require(model, "inverse")
    w = model.predict(X)[:, 0]
    return np.clip(w, 0.0, float(model.meta.get("payload_max", np.inf)))
