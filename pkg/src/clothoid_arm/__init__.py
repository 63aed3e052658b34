"""Polynomial-curvature spiral models of planar soft bending actuators."""

from clothoid_arm.spiral import (
    CurvaturePolynomial,
    FrameTransform,
    Pose,
    QuadratureConfig,
    ShapeRep,
    endpoint_jacobian,
    eval_pose,
    eval_theta,
    frame_at,
    sample_shape,
)
from clothoid_arm.hermite import (
    BoundaryData,
    SolveReport,
    SolverOptions,
    initial_guess,
    residual,
    solve_g1,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryData",
    "CurvaturePolynomial",
    "FrameTransform",
    "Pose",
    "QuadratureConfig",
    "ShapeRep",
    "SolveReport",
    "SolverOptions",
    "endpoint_jacobian",
    "eval_pose",
    "eval_theta",
    "frame_at",
    "initial_guess",
    "residual",
    "sample_shape",
    "solve_g1",
]
