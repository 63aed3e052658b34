"""Large-deflection Euler-Bernoulli oracle for a pressurized cantilever actuator.

Pressure enters as a uniform actuation moment ``pressure_gain * P``; tip loads
are dead loads with a fixed world direction. Equilibrium
``EI * kappa(s) = c_p * P + M_ext(s)`` is solved by under-relaxed fixed-point
iteration on the nodal curvature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from clothoid_arm.errors import ConfigError, DegenerateFit, NoConvergence, NumericalError
from clothoid_arm.spiral import CurvaturePolynomial

GRAVITY = 9.81
ACTUATOR_LENGTH = 0.15
# Stiffness is not reported for the physical actuator; it is chosen so a
# 25 g payload at 20 kPa visibly lowers the tip without reversing the bend.
DEFAULT_EI = 0.015
# Gain chosen so 100 kPa with no load bends the tip by pi/2.
DEFAULT_PRESSURE_GAIN = math.pi / 2 * DEFAULT_EI / (ACTUATOR_LENGTH * 100.0)
ACTUATOR_MASS_KG = 0.02586


@dataclass(frozen=True)
class BeamParams:
    length: float = ACTUATOR_LENGTH
    flexural_rigidity: float = DEFAULT_EI
    pressure_gain: float = DEFAULT_PRESSURE_GAIN
    self_weight: float = 0.0
    nodes: int = 241
    relaxation: float = 0.5
    tol: float = 1e-10
    max_iter: int = 500

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigError(f"beam length must be positive, got {self.length}")
        if not self.flexural_rigidity > 0:
            raise ConfigError(f"flexural rigidity must be positive, got {self.flexural_rigidity}")
        if self.nodes < 51:
            raise ConfigError(f"beam needs at least 51 nodes, got {self.nodes}")
        if self.self_weight < 0:
            raise ConfigError("self weight must be non-negative")
        if not 0 < self.relaxation <= 1:
            raise ConfigError(f"relaxation must be in (0, 1], got {self.relaxation}")

    @classmethod
    def from_dict(cls, d: dict) -> BeamParams:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown beam parameters: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def stations(self) -> np.ndarray:
        s = np.linspace(0.0, self.length, self.nodes)
        s[-1] = self.length
        return s


@dataclass(frozen=True)
class LoadCase:
    """Dead tip force. Payloads pull along world -y; contacts use ``direction``."""

    kind: str = "payload"
    magnitude: float = 0.0
    direction: tuple[float, float] = (0.0, -1.0)

    def __post_init__(self):
        if self.kind not in ("payload", "contact"):
            raise ConfigError(f"load kind must be 'payload' or 'contact', got {self.kind!r}")
        if not (self.magnitude >= 0 and math.isfinite(self.magnitude)):
            raise ConfigError(f"load magnitude must be non-negative, got {self.magnitude}")
        if self.kind == "payload":
            object.__setattr__(self, "direction", (0.0, -1.0))
        else:
            d = tuple(float(v) for v in self.direction)
            if len(d) != 2 or abs(math.hypot(*d) - 1.0) > 1e-9:
                raise ConfigError(f"contact direction must be a unit 2-vector, got {self.direction}")
            object.__setattr__(self, "direction", d)

    @classmethod
    def payload(cls, newtons: float) -> LoadCase:
        return cls("payload", newtons)

    @classmethod
    def contact(cls, newtons: float, direction: Sequence[float] = (-math.sqrt(0.5), -math.sqrt(0.5))) -> LoadCase:
        return cls("contact", newtons, tuple(direction))

    @property
    def force(self) -> np.ndarray:
        return self.magnitude * np.asarray(self.direction)


DEFAULT_CONTACT_DIRECTION = (-math.sqrt(0.5), -math.sqrt(0.5))


@dataclass(frozen=True)
class EquilibriumResult:
    stations: np.ndarray
    curvature: np.ndarray
    poses: np.ndarray  # (M, 3): x, y, theta
    iterations: int
    converged: bool
    moment_residual: float = field(default=0.0)

    @property
    def tip(self) -> np.ndarray:
        return self.poses[-1]


def integrate_curvature(s: np.ndarray, kappa: np.ndarray) -> np.ndarray:
    """Integrate the spiral ODE for piecewise-linear curvature; returns (M, 3) poses.

    theta is exact at the nodes (trapezoid on linear kappa); positions use
    Simpson's rule per interval with the exact midpoint angle.
    """
    h = np.diff(s)
    theta = np.concatenate([[0.0], np.cumsum(0.5 * h * (kappa[:-1] + kappa[1:]))])
    mid = theta[:-1] + h * (3.0 * kappa[:-1] + kappa[1:]) / 8.0
    dx = h / 6.0 * (np.cos(theta[:-1]) + 4.0 * np.cos(mid) + np.cos(theta[1:]))
    dy = h / 6.0 * (np.sin(theta[:-1]) + 4.0 * np.sin(mid) + np.sin(theta[1:]))
    x = np.concatenate([[0.0], np.cumsum(dx)])
    y = np.concatenate([[0.0], np.cumsum(dy)])
    return np.column_stack([x, y, theta])


def external_moment(s: np.ndarray, poses: np.ndarray, force: np.ndarray, self_weight: float = 0.0) -> np.ndarray:
    """z-moment about each station of everything distal to it."""
    rel = poses[-1, :2] - poses[:, :2]
    m = rel[:, 0] * force[1] - rel[:, 1] * force[0]
    if self_weight > 0:
        # -w * int_s^L (x(t) - x(s)) dt via cumulative trapezoid from the tip
        x = poses[:, 0]
        h = np.diff(s)
        seg = 0.5 * h * (x[:-1] + x[1:])
        tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        m = m - self_weight * (tail - x * (s[-1] - s))
    return m


def simulate_equilibrium(params: BeamParams, pressure: float, load: LoadCase) -> EquilibriumResult:
    """Static shape of the clamped actuator at ``pressure`` (kPa) under ``load``."""
    if not (pressure >= 0 and math.isfinite(pressure)):
        raise ConfigError(f"pressure must be non-negative, got {pressure}")
    s = params.stations
    EI = params.flexural_rigidity
    act = params.pressure_gain * pressure
    force = load.force
    omega = params.relaxation

    kappa = np.full_like(s, act / EI)
    poses = integrate_curvature(s, kappa)
    for it in range(1, params.max_iter + 1):
        target = (act + external_moment(s, poses, force, params.self_weight)) / EI
        update = omega * (target - kappa)
        kappa = kappa + update
        poses = integrate_curvature(s, kappa)
        change = float(np.max(np.abs(update)))
        if not math.isfinite(change):
            raise NumericalError(f"beam iteration diverged at P={pressure} kPa, {load}")
        if change < params.tol:
            res = moment_residual(params, pressure, load, s, kappa, poses)
            return EquilibriumResult(s, kappa, poses, it, True, res)
    raise NoConvergence(
        f"beam equilibrium not reached in {params.max_iter} iterations "
        f"(P={pressure} kPa, {load.kind} {load.magnitude} N); last change {change:.3e}"
    )


def moment_residual(params, pressure, load, s, kappa, poses) -> float:
    m_ext = external_moment(s, poses, load.force, params.self_weight)
    return float(np.max(np.abs(params.flexural_rigidity * kappa - params.pressure_gain * pressure - m_ext)))


def r_squared(y: np.ndarray, fitted: np.ndarray) -> float:
    """Coefficient of determination; a constant profile scores 1 if fitted exactly, else 0."""
    y = np.asarray(y, dtype=float)
    scale = max(float(np.max(np.abs(y))), 1e-300) if y.size else 1.0
    # Sums below this are rounding noise on a constant profile.
    floor = y.size * (64 * np.finfo(float).eps * scale) ** 2
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= floor:
        return 1.0 if ss_res <= floor else 0.0
    return 1.0 - ss_res / ss_tot


def fit_curvature_polynomial(result: EquilibriumResult, degree: int) -> tuple[CurvaturePolynomial, float]:
    """Least-squares polynomial fit of kappa(s) and its R^2."""
    if degree not in (0, 1, 2):
        raise ConfigError(f"fit degree must be 0, 1 or 2, got {degree}")
    if not result.converged:
        raise ConfigError("cannot fit an unconverged equilibrium")
    s, k = result.stations, result.curvature
    if len(s) < degree + 1:
        raise DegenerateFit(f"{len(s)} stations cannot determine a degree-{degree} fit")
    V = np.vander(s, degree + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(V, k, rcond=None)
    return CurvaturePolynomial(coeffs), r_squared(k, V @ coeffs)


@dataclass
class StudyTable:
    """Cell-wise R^2 values and per-(kind, degree) summaries."""

    rows: list[dict]
    failures: list[dict]

    def summary(self) -> list[dict]:
        out = []
        keys = sorted({(r["kind"], r["degree"]) for r in self.rows}, key=lambda t: (t[0], t[1]))
        for kind, degree in keys:
            vals = np.array([r["r_squared"] for r in self.rows if r["kind"] == kind and r["degree"] == degree])
            out.append({"kind": kind, "degree": degree, "mean_r2": float(vals.mean()), "std_r2": float(vals.std())})
        return out

    def values(self, kind: str, degree: int) -> np.ndarray:
        return np.array([r["r_squared"] for r in self.rows if r["kind"] == kind and r["degree"] == degree])

    def write_csv(self, path) -> None:
        _write_rows(path, ["kind", "degree", "pressure_kPa", "load_N", "r_squared"], self.rows)

    def write_summary_csv(self, path) -> None:
        _write_rows(path, ["kind", "degree", "mean_r2", "std_r2"], self.summary())


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})


def _study_cell(args):
    params, pressure, load = args
    res = simulate_equilibrium(params, pressure, load)
    return [fit_curvature_polynomial(res, d)[1] for d in (1, 2)]


def run_validation_study(
    params: BeamParams,
    pressure_grid: Iterable[float],
    load_grid: Iterable[float],
    kinds: Sequence[str] = ("payload", "contact"),
    contact_direction: Sequence[float] = DEFAULT_CONTACT_DIRECTION,
    jobs: int = 1,
) -> StudyTable:
    """Fit linear and quadratic curvature to every oracle cell of the grid."""
    pressures = [float(p) for p in pressure_grid]
    loads = [float(w) for w in load_grid]
    if not pressures or not loads or not kinds:
        raise ConfigError("validation study needs non-empty pressure, load and kind grids")
    cells = []
    for kind in kinds:
        for p in pressures:
            for w in loads:
                load = LoadCase.payload(w) if kind == "payload" else LoadCase.contact(w, contact_direction)
                cells.append((kind, p, w, load))

    def run(cell):
        kind, p, w, load = cell
        try:
            return _study_cell((params, p, load))
        except NumericalError as exc:
            return exc

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            outcomes = list(pool.map(_safe_cell, [(params, c[1], c[3]) for c in cells]))
    else:
        outcomes = [run(c) for c in cells]

    rows, failures = [], []
    for (kind, p, w, _), out in zip(cells, outcomes):
        if isinstance(out, Exception):
            failures.append({"kind": kind, "pressure_kPa": p, "load_N": w, "reason": str(out)})
            continue
        for degree, r2 in zip((1, 2), out):
            rows.append({"kind": kind, "degree": degree, "pressure_kPa": p, "load_N": w, "r_squared": r2})
    return StudyTable(rows, failures)


def _safe_cell(args):
    try:
        return _study_cell(args)
    except NumericalError as exc:
        return exc
