"""G1 Hermite interpolation: curvature coefficients from two end poses.

Given base and tip positions with tangent angles and the arc length, find
kappa minimizing the squared terminal mismatch. Position mismatches are
divided by L so all three residual entries are dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from clothoid_arm.errors import ConfigError, InfeasibleBoundary, NoConvergence
from clothoid_arm.spiral import (
    DEFAULT_QUAD,
    MAX_ORDER,
    CurvaturePolynomial,
    Pose,
    QuadratureConfig,
    ShapeRep,
    composite_rule,
    theta_poly,
)

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Map an angle into [-pi, pi)."""
    return (a + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class BoundaryData:
    p0: Pose
    p1: Pose
    length: float

    def __post_init__(self):
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ConfigError(f"arc length must be positive, got {self.length}")
        if self.chord > self.length * (1.0 + 1e-12):
            raise InfeasibleBoundary(
                f"chord {self.chord:.6g} exceeds arc length {self.length:.6g}"
            )

    @property
    def chord(self) -> float:
        return math.hypot(self.p1.x - self.p0.x, self.p1.y - self.p0.y)

    @classmethod
    def from_shape(cls, shape: ShapeRep, quad: QuadratureConfig = DEFAULT_QUAD) -> BoundaryData:
        """End poses of ``shape`` (base at the origin)."""
        from clothoid_arm.spiral import eval_pose

        return cls(Pose(0.0, 0.0, shape.theta0), eval_pose(shape, shape.length, quad), shape.length)

    @classmethod
    def from_dict(cls, d: dict) -> BoundaryData:
        try:
            p0, p1 = d["p0"], d["p1"]
            return cls(
                Pose(float(p0[0]), float(p0[1]), float(d["theta0"])),
                Pose(float(p1[0]), float(p1[1]), float(d["theta1"])),
                float(d["L"]),
            )
        except (KeyError, IndexError, TypeError) as exc:
            raise ConfigError(f"malformed boundary record: {exc!r}") from None

    def to_dict(self) -> dict:
        return {
            "p0": [self.p0.x, self.p0.y],
            "theta0": self.p0.theta,
            "p1": [self.p1.x, self.p1.y],
            "theta1": self.p1.theta,
            "L": self.length,
        }


@dataclass(frozen=True)
class SolverOptions:
    lambda_init: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 10.0
    tol: float = 1e-10
    step_tol: float = 1e-12
    max_iter: int = 200
    quad: QuadratureConfig = DEFAULT_QUAD


@dataclass(frozen=True)
class SolveReport:
    """Outcome of :func:`solve_g1`.

    ``residual`` is the weighted terminal mismatch (dx/L, dy/L, dtheta).
    ``status`` is "tolerance" (residual below tol), "stationary" (least-squares
    optimum reached with nonzero residual, typical for N < 2) or "straight".
    ``theta1_target`` is the 2*pi representative of theta1 the solver matched.
    """

    kappa: CurvaturePolynomial
    residual: np.ndarray
    iterations: int
    converged: bool
    status: str
    theta1_target: float
    history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residual))

    def shape(self, boundary: BoundaryData) -> ShapeRep:
        return ShapeRep(self.kappa, boundary.p0.theta, boundary.length)

    def to_dict(self) -> dict:
        return {
            "kappa": list(self.kappa.coeffs),
            "residual": [float(v) for v in self.residual],
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "status": self.status,
            "theta1_target": self.theta1_target,
        }


def _terminal(coeffs: np.ndarray, boundary: BoundaryData, quad: QuadratureConfig, jac: bool):
    """Tip pose for coefficients ``coeffs`` and optionally its Jacobian."""
    L = boundary.length
    th0 = boundary.p0.theta
    tau, w = composite_rule(L, quad)
    th = theta_poly(coeffs, th0, tau)
    wc, ws = w * np.cos(th), w * np.sin(th)
    tip = np.array([boundary.p0.x + wc.sum(), boundary.p0.y + ws.sum(), theta_poly(coeffs, th0, L)])
    if not jac:
        return tip, None
    k = np.arange(len(coeffs))
    basis = tau[None, :] ** (k[:, None] + 1) / (k[:, None] + 1)
    J = np.vstack([-(basis * ws).sum(axis=1), (basis * wc).sum(axis=1), L ** (k + 1) / (k + 1)])
    return tip, J


def _weighted(tip: np.ndarray, boundary: BoundaryData, theta1: float) -> np.ndarray:
    L = boundary.length
    return np.array([(tip[0] - boundary.p1.x) / L, (tip[1] - boundary.p1.y) / L, tip[2] - theta1])


def residual(kappa: CurvaturePolynomial, boundary: BoundaryData, quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """Weighted terminal mismatch (dx/L, dy/L, dtheta).

    The angle entry is taken against the representative of theta1 nearest
    the predicted tip angle, i.e. it lies in [-pi, pi).
    """
    kappa = kappa if isinstance(kappa, CurvaturePolynomial) else CurvaturePolynomial(kappa)
    tip, _ = _terminal(kappa.as_array(), boundary, quad, jac=False)
    r = _weighted(tip, boundary, boundary.p1.theta)
    r[2] = wrap_angle(r[2])
    return r


def initial_guess(boundary: BoundaryData, order: int) -> CurvaturePolynomial:
    """Constant-curvature arc with the boundary's net tangent rotation."""
    _check_order(order)
    coeffs = np.zeros(order + 1)
    coeffs[0] = (boundary.p1.theta - boundary.p0.theta) / boundary.length
    return CurvaturePolynomial(coeffs)


def _check_order(order: int) -> None:
    if not (isinstance(order, (int, np.integer)) and 0 <= order <= MAX_ORDER):
        raise ConfigError(f"curvature order must be an integer in 0..{MAX_ORDER}, got {order!r}")


def _is_straight(boundary: BoundaryData) -> bool:
    L = boundary.length
    if abs(boundary.chord - L) > 1e-12 * L:
        return False
    heading = math.atan2(boundary.p1.y - boundary.p0.y, boundary.p1.x - boundary.p0.x)
    return (
        abs(wrap_angle(boundary.p0.theta - heading)) < 1e-12
        and abs(boundary.p1.theta - boundary.p0.theta) < 1e-12
    )


def solve_g1(boundary: BoundaryData, order: int = 2, options: SolverOptions | None = None) -> SolveReport:
    """Levenberg-Marquardt fit of curvature coefficients to the boundary poses.

    Damping multiplies diag(J^T J) so the iteration is invariant to the very
    different units of the coefficients. theta0 comes from the boundary and is
    not optimized.
    """
    _check_order(order)
    opts = options or SolverOptions()
    quad = opts.quad

    if _is_straight(boundary):
        zero = CurvaturePolynomial.zeros(order)
        return SolveReport(zero, np.zeros(3), 0, True, "straight", boundary.p1.theta, (0.0,))

    coeffs = initial_guess(boundary, order).as_array()
    tip, J = _terminal(coeffs, boundary, quad, jac=True)
    # Pin the 2*pi branch of theta1 nearest the initial prediction.
    theta1 = boundary.p1.theta + TWO_PI * round((tip[2] - boundary.p1.theta) / TWO_PI)
    r = _weighted(tip, boundary, theta1)
    cost = float(r @ r)
    row_scale = np.array([1.0 / boundary.length, 1.0 / boundary.length, 1.0])

    lam = opts.lambda_init
    history = [math.sqrt(cost)]
    status = None
    it = 0
    while it < opts.max_iter:
        if math.sqrt(cost) < opts.tol:
            status = "tolerance"
            break
        it += 1
        Jw = J * row_scale[:, None]
        A = Jw.T @ Jw
        g = Jw.T @ r
        D = np.diag(np.maximum(np.diag(A), 1e-300))
        try:
            step = -np.linalg.solve(A + lam * D, g)
        except np.linalg.LinAlgError:
            lam *= opts.lambda_up
            continue
        if np.linalg.norm(step) <= opts.step_tol * (np.linalg.norm(coeffs) + opts.step_tol):
            status = "stationary"
            break
        trial = coeffs + step
        tip_t, J_t = _terminal(trial, boundary, quad, jac=True)
        r_t = _weighted(tip_t, boundary, theta1)
        cost_t = float(r_t @ r_t)
        if cost_t < cost:
            coeffs, J, r, cost = trial, J_t, r_t, cost_t
            lam /= opts.lambda_down
            history.append(math.sqrt(cost))
        else:
            lam *= opts.lambda_up
            if lam > 1e300:
                status = "stationary"
                break

    if status is None:
        if math.sqrt(cost) < opts.tol:
            status = "tolerance"
        else:
            raise NoConvergence(
                f"G1 solve hit {opts.max_iter} iterations with residual {math.sqrt(cost):.3e}"
            )

    return SolveReport(
        kappa=CurvaturePolynomial(coeffs),
        residual=r,
        iterations=it,
        converged=status == "tolerance",
        status=status,
        theta1_target=theta1,
        history=tuple(history),
    )
