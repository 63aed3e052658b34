from clothoid_arm.learn.metrics import EvalReport, load_error, position_errors
from clothoid_arm.learn.mlp import Hyperparams, MlpModel, Normalizer, mae_loss_and_grads, mlp_init, train
from clothoid_arm.learn.models import (
    forward_predict,
    forward_predict_batch,
    inverse_predict,
    inverse_predict_batch,
    train_forward,
    train_inverse,
)
from clothoid_arm.learn.smoothing import gaussian_kernel, gaussian_smooth

__all__ = [
    "EvalReport",
    "Hyperparams",
    "MlpModel",
    "Normalizer",
    "forward_predict",
    "forward_predict_batch",
    "gaussian_kernel",
    "gaussian_smooth",
    "inverse_predict",
    "inverse_predict_batch",
    "load_error",
    "mae_loss_and_grads",
    "mlp_init",
    "position_errors",
    "train",
    "train_forward",
    "train_inverse",
]
