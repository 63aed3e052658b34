"""Planar curves whose curvature is a polynomial in arc length.

Orientation has a closed form, theta(s) = theta0 + sum_k kappa_k s^(k+1)/(k+1).
Positions are integrals of (cos theta, sin theta) and are evaluated with
composite Gauss-Legendre quadrature. The base point is always the origin.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from clothoid_arm.errors import ConfigError, DomainError

MAX_ORDER = 4


@dataclass(frozen=True)
class CurvaturePolynomial:
    """Curvature coefficients [kappa_0, ..., kappa_N]; kappa_k has units 1/m^(k+1)."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in np.atleast_1d(np.asarray(self.coeffs, dtype=float)))
        if not 1 <= len(coeffs) <= MAX_ORDER + 1:
            raise ConfigError(f"curvature order must be in 0..{MAX_ORDER}, got {len(coeffs) - 1}")
        if not all(math.isfinite(c) for c in coeffs):
            raise ConfigError(f"non-finite curvature coefficient in {coeffs}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, order: int) -> CurvaturePolynomial:
        return cls((0.0,) * (order + 1))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, s):
        """Curvature at ``s`` by Horner's rule."""
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for c in reversed(self.coeffs):
            out = out * s + c
        return out if out.ndim else float(out)

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs)


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float

    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class ShapeRep:
    """Complete shape descriptor q = (kappa, theta0) for a curve of length ``length``."""

    kappa: CurvaturePolynomial
    theta0: float
    length: float

    def __post_init__(self):
        if not isinstance(self.kappa, CurvaturePolynomial):
            object.__setattr__(self, "kappa", CurvaturePolynomial(self.kappa))
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ConfigError(f"shape length must be positive, got {self.length}")
        if not math.isfinite(self.theta0):
            raise ConfigError("theta0 must be finite")
        object.__setattr__(self, "theta0", float(self.theta0))
        object.__setattr__(self, "length", float(self.length))

    @property
    def order(self) -> int:
        return self.kappa.order


@dataclass(frozen=True)
class FrameTransform:
    rotation: np.ndarray = field(repr=False)
    translation: np.ndarray

    def homogeneous(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite Gauss-Legendre rule: ``panels`` equal panels of ``nodes`` points each."""

    nodes: int = 8
    panels: int = 64

    def __post_init__(self):
        if self.nodes < 2:
            raise ConfigError(f"quadrature needs at least 2 nodes per panel, got {self.nodes}")
        if self.panels < 1:
            raise ConfigError(f"quadrature needs at least 1 panel, got {self.panels}")


DEFAULT_QUAD = QuadratureConfig()


@lru_cache(maxsize=32)
def _unit_rule(nodes: int, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite rule on [0, 1]."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    left = np.arange(panels)[:, None] / panels
    x = (left + (t[None, :] + 1.0) / (2 * panels)).ravel()
    wt = np.tile(w / (2 * panels), panels)
    x.setflags(write=False)
    wt.setflags(write=False)
    return x, wt


def composite_rule(upper, quad: QuadratureConfig = DEFAULT_QUAD) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes/weights on [0, upper]; ``upper`` may be an array (one row per bound)."""
    x, w = _unit_rule(quad.nodes, quad.panels)
    upper = np.asarray(upper, dtype=float)
    return upper[..., None] * x, upper[..., None] * w


def theta_poly(coeffs: np.ndarray, theta0: float, s):
    """theta(s) for raw coefficient arrays; vectorized over ``s``."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    for k in range(len(coeffs) - 1, -1, -1):
        out = (out + coeffs[k] / (k + 1)) * s
    return out + theta0


def _check_station(shape: ShapeRep, s) -> np.ndarray:
    s_arr = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s_arr)) or np.any(s_arr < 0.0) or np.any(s_arr > shape.length):
        raise DomainError(f"arc length {s} outside [0, {shape.length}]")
    return s_arr


def eval_theta(shape: ShapeRep, s: float) -> float:
    """Tangent angle at arc length ``s`` (closed form, unwrapped)."""
    _check_station(shape, s)
    return float(theta_poly(shape.kappa.as_array(), shape.theta0, s))


def _positions(coeffs: np.ndarray, theta0: float, s: np.ndarray, quad: QuadratureConfig):
    tau, w = composite_rule(s, quad)
    th = theta_poly(coeffs, theta0, tau)
    return np.sum(w * np.cos(th), axis=-1), np.sum(w * np.sin(th), axis=-1)


def eval_pose(shape: ShapeRep, s: float, quad: QuadratureConfig = DEFAULT_QUAD) -> Pose:
    s_arr = _check_station(shape, s)
    coeffs = shape.kappa.as_array()
    x, y = _positions(coeffs, shape.theta0, s_arr, quad)
    return Pose(float(x), float(y), float(theta_poly(coeffs, shape.theta0, s_arr)))


def eval_poses(shape: ShapeRep, stations: Sequence[float], quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """Poses at many stations as an (M, 3) array of (x, y, theta)."""
    s = _check_station(shape, np.asarray(stations, dtype=float).ravel())
    coeffs = shape.kappa.as_array()
    x, y = _positions(coeffs, shape.theta0, s, quad)
    return np.column_stack([x, y, theta_poly(coeffs, shape.theta0, s)])


def stations(length: float, count: int) -> np.ndarray:
    if count < 2:
        raise ConfigError(f"need at least 2 stations, got {count}")
    s = np.linspace(0.0, length, count)
    s[-1] = length
    return s


def sample_shape(shape: ShapeRep, count: int, quad: QuadratureConfig = DEFAULT_QUAD) -> list[Pose]:
    """Poses at ``count`` equally spaced stations from base to tip."""
    arr = eval_poses(shape, stations(shape.length, count), quad)
    return [Pose(*map(float, row)) for row in arr]


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def frame_at(shape: ShapeRep, s: float, quad: QuadratureConfig = DEFAULT_QUAD) -> FrameTransform:
    pose = eval_pose(shape, s, quad)
    return FrameTransform(rot_z(pose.theta), np.array([pose.x, pose.y, 0.0]))


def endpoint_jacobian(shape: ShapeRep, quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """d(x(L), y(L), theta(L)) / d(kappa_0..kappa_N), shape (3, N+1).

    Differentiating under the integral sign gives
    dx/dk_k = -int sin(theta) tau^(k+1)/(k+1), dy/dk_k = int cos(theta) tau^(k+1)/(k+1).
    """
    coeffs = shape.kappa.as_array()
    L = shape.length
    tau, w = composite_rule(L, quad)
    th = theta_poly(coeffs, shape.theta0, tau)
    k = np.arange(len(coeffs))
    basis = tau[None, :] ** (k[:, None] + 1) / (k[:, None] + 1)
    J = np.empty((3, len(coeffs)))
    J[0] = -(basis * (w * np.sin(th))).sum(axis=1)
    J[1] = (basis * (w * np.cos(th))).sum(axis=1)
    J[2] = L ** (k + 1) / (k + 1)
    return J


def write_shape_csv(path, shape: ShapeRep, count: int = 101, quad: QuadratureConfig = DEFAULT_QUAD) -> None:
    """Station table ``s,x,y,theta`` at full double precision."""
    s = stations(shape.length, count)
    write_station_csv(path, s, eval_poses(shape, s, quad))


def write_station_csv(path, s, poses) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s", "x", "y", "theta"])
        for si, (x, y, th) in zip(s, poses):
            writer.writerow([f"{v:.17g}" for v in (si, x, y, th)])


def read_station_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:]
