"""Hold-out evaluation of forward and inverse models across curvature orders."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from clothoid_arm.beam import BeamParams
from clothoid_arm.dataset import PAYLOAD_RANGE_G, Dataset, GridConfig, extract_records, simulate_grid, split
from clothoid_arm.learn.metrics import REFERENCE_FRACTIONS, EvalReport, load_error, position_errors
from clothoid_arm.learn.mlp import Hyperparams, MlpModel
from clothoid_arm.learn.models import forward_predict, inverse_features, inverse_predict_batch, train_forward, train_inverse

log = logging.getLogger(__name__)

N_VAL = 40


def evaluate_models(
    dataset: Dataset,
    val: Sequence,
    forward: MlpModel | None,
    inverse: MlpModel | None,
    payload_range: float = PAYLOAD_RANGE_G,
) -> EvalReport:
    """Position errors at L/3, 2L/3, L and payload errors over ``val``."""
    L = dataset.length
    ref = [dataset.station_index(f * L) for f in REFERENCE_FRACTIONS]
    pos = np.zeros((len(val), 3))
    if forward is not None:
        outside = 0
        for i, rec in enumerate(val):
            # Hold-out cells on the grid boundary may sit just outside the training envelope.
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                shape = forward_predict(forward, rec.pressure, rec.payload, dataset.order)
            outside += bool(caught)
            truth = np.array(rec.markers)[ref]
            pos[i] = position_errors(shape, truth, L)
        if outside:
            log.info("%d of %d hold-out queries lie outside the training envelope", outside, len(val))
    loads = np.zeros(len(val))
    if inverse is not None:
        X, Y = inverse_features(val)
        pred = inverse_predict_batch(inverse, X)
        loads = np.array([load_error(p, t, payload_range) for p, t in zip(pred, Y[:, 0])])
    return EvalReport.from_samples(dataset.order, pos, loads)


@dataclass
class OrderResult:
    dataset: Dataset
    forward: MlpModel
    inverse: MlpModel
    forward_history: list[float]
    inverse_history: list[float]
    report: EvalReport


def train_and_evaluate(dataset: Dataset, n_val: int = N_VAL, hyper: Hyperparams | None = None) -> OrderResult:
    hyper = hyper or Hyperparams()
    train_set, val = split(dataset.records, n_val, hyper.seed)
    fwd, fh = train_forward(train_set, dataset.order, dataset.length, hyper)
    inv, ih = train_inverse(train_set, dataset.order, dataset.length, hyper)
    report = evaluate_models(dataset, val, fwd, inv)
    log.info("N=%d tip error %.3f%% load error %.3f%%", dataset.order, report.err_tip[0], report.load_err[0])
    return OrderResult(dataset, fwd, inv, fh, ih, report)


def run_pipeline(
    params: BeamParams | None = None,
    grid: GridConfig | None = None,
    orders: Sequence[int] = (0, 1, 2),
    n_val: int = N_VAL,
    hyper: Hyperparams | None = None,
    jobs: int = 1,
) -> dict[int, OrderResult]:
    """Generate the grid once, then extract, train and evaluate each order."""
    params = params or BeamParams()
    grid = grid or GridConfig()
    hyper = hyper or Hyperparams(seed=grid.seed)
    observations = simulate_grid(params, grid, jobs)
    out = {}
    for order in orders:
        ds = extract_records(observations, params, replace(grid, order=order))
        out[order] = train_and_evaluate(ds, n_val, hyper)
    return out
