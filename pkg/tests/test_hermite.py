import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clothoid_arm.beam import BeamParams
from clothoid_arm.dataset import sample_envelope_shapes
from clothoid_arm.errors import ConfigError, InfeasibleBoundary, NoConvergence
from clothoid_arm.hermite import (
    BoundaryData,
    SolverOptions,
    initial_guess,
    residual,
    solve_g1,
    wrap_angle,
)
from clothoid_arm.spiral import CurvaturePolynomial, Pose, ShapeRep, eval_pose, eval_poses, stations

L = 0.15
STRAIGHT = BoundaryData(Pose(0, 0, 0), Pose(L, 0, 0), L)
ENVELOPE = sample_envelope_shapes(BeamParams(), 40, seed=7)


def boundary_of(coeffs, theta0=0.0, length=L):
    return BoundaryData.from_shape(ShapeRep(CurvaturePolynomial(coeffs), theta0, length))


def max_deviation(a: ShapeRep, b: ShapeRep, m=101):
    s = stations(a.length, m)
    return float(np.linalg.norm(eval_poses(a, s)[:, :2] - eval_poses(b, s)[:, :2], axis=1).max())


def rotate_boundary(b: BoundaryData, alpha: float) -> BoundaryData:
    c, s = math.cos(alpha), math.sin(alpha)
    dx, dy = b.p1.x - b.p0.x, b.p1.y - b.p0.y
    p1 = Pose(b.p0.x + c * dx - s * dy, b.p0.y + s * dx + c * dy, b.p1.theta + alpha)
    return BoundaryData(Pose(b.p0.x, b.p0.y, b.p0.theta + alpha), p1, b.length)


class TestBoundary:
    def test_chord_longer_than_length(self):
        with pytest.raises(InfeasibleBoundary):
            BoundaryData(Pose(0, 0, 0), Pose(0.2, 0, 0), L)

    def test_nonpositive_length(self):
        with pytest.raises(ConfigError):
            BoundaryData(Pose(0, 0, 0), Pose(0, 0, 0), 0.0)

    def test_json_round_trip(self):
        d = {"p0": [0.0, 0.0], "theta0": 0.1, "p1": [0.1, 0.05], "theta1": 0.8, "L": 0.15}
        b = BoundaryData.from_dict(d)
        assert b.to_dict() == d

    def test_json_missing_key(self):
        with pytest.raises(ConfigError):
            BoundaryData.from_dict({"p0": [0, 0], "theta0": 0})


class TestResidual:
    def test_straight_zero(self):
        assert np.abs(residual(CurvaturePolynomial([0.0]), STRAIGHT)).max() < 1e-15

    def test_arc_against_straight(self):
        r = residual(CurvaturePolynomial([math.pi / (2 * L)]), STRAIGHT)
        assert r == pytest.approx([2 / math.pi - 1, 2 / math.pi, math.pi / 2], abs=1e-14)
        assert r == pytest.approx([-0.36338, 0.63662, 1.57080], abs=5e-6)

    def test_generated_boundary(self):
        k = CurvaturePolynomial([2.0, -30.0, 400.0])
        assert np.abs(residual(k, boundary_of(k.coeffs))).max() < 1e-12

    def test_angle_wrapped(self):
        b = boundary_of([2.0, -30.0, 400.0])
        shifted = BoundaryData(b.p0, Pose(b.p1.x, b.p1.y, b.p1.theta + 2 * math.pi), L)
        assert abs(residual(CurvaturePolynomial([2.0, -30.0, 400.0]), shifted)[2]) < 1e-12

    def test_wrap_angle_range(self):
        assert wrap_angle(math.pi) == -math.pi
        assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


class TestInitialGuess:
    def test_parallel_tangents(self):
        b = BoundaryData(Pose(0, 0, 0.3), Pose(0.1, 0.05, 0.3), L)
        assert initial_guess(b, 2).coeffs == (0.0, 0.0, 0.0)

    def test_quarter_turn(self):
        b = BoundaryData(Pose(0, 0, 0), Pose(0.09, 0.09, math.pi / 2), L)
        assert initial_guess(b, 0).coeffs[0] == pytest.approx(10.47198, abs=5e-6)

    def test_guess_worse_than_solution(self):
        b = boundary_of([2.0, -30.0, 400.0])
        guess = np.linalg.norm(residual(initial_guess(b, 2), b))
        assert guess > solve_g1(b, 2).residual_norm


class TestSolve:
    def test_straight(self):
        rep = solve_g1(STRAIGHT, 2)
        assert rep.kappa.coeffs == (0.0, 0.0, 0.0)
        assert rep.residual_norm == 0.0 and rep.converged

    def test_arc_order_zero(self):
        rep = solve_g1(boundary_of([math.pi / (2 * L)]), 0)
        assert rep.kappa.coeffs[0] == pytest.approx(math.pi / (2 * L), rel=1e-10)
        assert rep.converged

    def test_round_trip_quadratic(self):
        src = ShapeRep(CurvaturePolynomial([2.0, -30.0, 400.0]), 0.0, L)
        b = BoundaryData.from_shape(src)
        rep = solve_g1(b, 2)
        assert rep.converged and rep.residual_norm < 1e-8
        assert max_deviation(rep.shape(b), src) < 1e-6 * L

    def test_nonzero_base_point(self):
        src = ShapeRep(CurvaturePolynomial([2.0, -30.0, 400.0]), 0.2, L)
        b0 = BoundaryData.from_shape(src)
        moved = BoundaryData(Pose(1.0, -2.0, 0.2), Pose(b0.p1.x + 1.0, b0.p1.y - 2.0, b0.p1.theta), L)
        rep = solve_g1(moved, 2)
        assert np.allclose(rep.kappa.coeffs, solve_g1(b0, 2).kappa.coeffs, rtol=1e-9)

    def test_lower_orders_return_least_squares_optimum(self):
        b = boundary_of([2.0, -30.0, 400.0])
        rep = solve_g1(b, 1)
        assert rep.status == "stationary" and not rep.converged
        # Stationarity: the weighted gradient vanishes at the returned point.
        from clothoid_arm.spiral import endpoint_jacobian

        J = endpoint_jacobian(rep.shape(b))
        J[:2] /= L
        g = J.T @ rep.residual
        assert np.all(np.abs(g) * np.array([1.0, L]) < 1e-9)

    def test_iteration_cap(self):
        with pytest.raises(NoConvergence):
            solve_g1(boundary_of([2.0, -30.0, 400.0]), 2, SolverOptions(max_iter=1))

    @pytest.mark.parametrize("order", [-1, 5, 1.5])
    def test_bad_order(self, order):
        with pytest.raises(ConfigError):
            solve_g1(STRAIGHT, order)

    def test_report_dict(self):
        d = solve_g1(boundary_of([3.0, 10.0]), 1).to_dict()
        assert set(d) >= {"kappa", "residual", "iterations", "converged", "status"}


class TestInvariants:
    @pytest.mark.parametrize("src", ENVELOPE, ids=lambda s: f"k0={s.kappa.coeffs[0]:.2f}")
    def test_round_trip(self, src):
        b = BoundaryData.from_shape(src)
        rep = solve_g1(b, 2)
        assert rep.residual_norm < 1e-8
        assert max_deviation(rep.shape(b), src) < 1e-6 * L

    @given(st.integers(0, len(ENVELOPE) - 1), st.floats(-math.pi, math.pi))
    @settings(max_examples=40, deadline=None)
    def test_rigid_motion_invariance(self, i, alpha):
        b = BoundaryData.from_shape(ENVELOPE[i])
        k1 = np.array(solve_g1(b, 2).kappa.coeffs)
        k2 = np.array(solve_g1(rotate_boundary(b, alpha), 2).kappa.coeffs)
        assert np.abs(k1 - k2).max() < 1e-8

    @given(st.integers(0, len(ENVELOPE) - 1), st.floats(0.1, 10.0))
    @settings(max_examples=40, deadline=None)
    def test_scaling_covariance(self, i, lam):
        b = BoundaryData.from_shape(ENVELOPE[i])
        scaled = BoundaryData(
            Pose(lam * b.p0.x, lam * b.p0.y, b.p0.theta), Pose(lam * b.p1.x, lam * b.p1.y, b.p1.theta), lam * L
        )
        k = np.array(solve_g1(b, 2).kappa.coeffs)
        ks = np.array(solve_g1(scaled, 2).kappa.coeffs)
        expected = k / lam ** (np.arange(3) + 1)
        assert np.all(np.abs(ks - expected) <= 1e-6 * np.abs(expected))

    @pytest.mark.parametrize("order", [0, 1, 2, 3])
    def test_monotone_progress(self, order):
        for src in ENVELOPE[:10]:
            hist = solve_g1(BoundaryData.from_shape(src), order).history
            assert all(b <= a for a, b in zip(hist, hist[1:]))

    def test_order_nesting(self):
        for src in ENVELOPE:
            b = BoundaryData.from_shape(src)
            r0, r1, r2 = (solve_g1(b, n).residual_norm for n in (0, 1, 2))
            assert r2 <= r1 <= r0

    def test_tip_pose_matched(self):
        src = ENVELOPE[0]
        b = BoundaryData.from_shape(src)
        tip = eval_pose(solve_g1(b, 2).shape(b), L)
        assert math.hypot(tip.x - b.p1.x, tip.y - b.p1.y) < 1e-9 * L
