"""Shape and payload error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from clothoid_arm.errors import ConfigError
from clothoid_arm.spiral import ShapeRep, eval_poses

REFERENCE_FRACTIONS = (1.0 / 3.0, 2.0 / 3.0, 1.0)


def position_errors(pred: ShapeRep, truth_markers, length: float) -> np.ndarray:
    """Percent-of-length distance between predicted and true points at L/3, 2L/3 and L.

    ``truth_markers`` holds the true (x, y[, theta]) at those three stations.
    """
    truth = np.asarray(truth_markers, dtype=float)[:, :2]
    if truth.shape != (3, 2):
        raise ConfigError(f"need three reference positions, got array of shape {truth.shape}")
    s = np.array(REFERENCE_FRACTIONS) * pred.length
    s[-1] = pred.length
    p = eval_poses(pred, s)[:, :2]
    return 100.0 * np.linalg.norm(p - truth, axis=1) / length


def load_error(pred_w: float, true_w: float, range_w: float) -> float:
    if not range_w > 0:
        raise ConfigError(f"payload range must be positive, got {range_w}")
    return 100.0 * abs(pred_w - true_w) / range_w


@dataclass(frozen=True)
class EvalReport:
    """Mean and standard deviation of each error, in percent."""

    order: int
    err_third: tuple[float, float]
    err_twothirds: tuple[float, float]
    err_tip: tuple[float, float]
    load_err: tuple[float, float]
    n_val: int

    @classmethod
    def from_samples(cls, order: int, pos_errs, load_errs) -> EvalReport:
        P = np.asarray(pos_errs, dtype=float).reshape(-1, 3)
        W = np.asarray(load_errs, dtype=float).ravel()
        ms = lambda a: (float(a.mean()), float(a.std()))  # noqa: E731
        return cls(order, ms(P[:, 0]), ms(P[:, 1]), ms(P[:, 2]), ms(W), len(P))

    COLUMNS = (
        "order",
        "err_third_mean", "err_third_std",
        "err_twothirds_mean", "err_twothirds_std",
        "err_tip_mean", "err_tip_std",
        "load_err_mean", "load_err_std",
    )

    def row(self) -> list:
        return [self.order, *self.err_third, *self.err_twothirds, *self.err_tip, *self.load_err]
