"""
Curve data for the four geometries: Euclidean space curves, reparametrizations
of RP^1, planar star-shaped curves and curves of Lagrangian planes.

Non-closed curves are stored as a periodic part plus an explicit drift so
that spectral differentiation stays exact:

* Euclidean: ``u(x + L) = u(x) + drift * L``
* projective: ``u(x) = slope * x + p(x)``
* star-shaped: ``gamma(x + L) = M gamma(x)`` with ``M = [[1, 0], [c, 1]]``
* Lagrangian: ``u(x) = slope * x + P(x)`` with ``slope`` a symmetric matrix
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DegenerateCurveError, InvalidInputError, ShapeMismatchError
from .numerics import (
    GridFunction,
    PeriodicGrid,
    antiderivative,
    derivative_xlinear,
    spectral_derivative,
    trig_interpolate,
)

GENERIC_TOL = 1e-8


def _as_finite(values, shape, what):
    values = np.asarray(values, dtype=float)
    if values.shape != shape:
        raise ShapeMismatchError(f"{what}: expected shape {shape}, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise InvalidInputError(f"{what} contains non-finite values")
    return values


@dataclass(frozen=True, eq=False)
class EuclideanCurve:
    grid: PeriodicGrid
    points: np.ndarray
    drift: np.ndarray = field(default_factory=lambda: np.zeros(3))
    strict: bool = True

    geometry = "euclidean"

    def __post_init__(self):
        pts = _as_finite(self.points, (self.grid.n, 3), "Euclidean curve")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "drift", _as_finite(self.drift, (3,), "drift"))
        if self.strict:
            speed = self.speed()
            if speed.min() <= GENERIC_TOL:
                raise DegenerateCurveError(f"curve is not regular: min speed {speed.min():.3e}")

    @classmethod
    def from_function(cls, grid, func, drift=(0.0, 0.0, 0.0), strict=True):
        pts = np.asarray(func(grid.points), dtype=float)
        if pts.shape == (3, grid.n):
            pts = pts.T
        return cls(grid, pts, np.asarray(drift, dtype=float), strict)

    @property
    def periodic_part(self):
        return self.points - self.grid.points[:, None] * self.drift

    def derivative(self, order=1):
        d = spectral_derivative(self.periodic_part, self.grid.length, order)
        if order == 1:
            d = d + self.drift
        return d

    def speed(self):
        return np.linalg.norm(self.derivative(1), axis=1)

    def with_periodic_part(self, periodic):
        pts = periodic + self.grid.points[:, None] * self.drift
        return EuclideanCurve(self.grid, pts, self.drift, self.strict)


@dataclass(frozen=True, eq=False)
class ProjectiveCurve:
    """Reparametrization ``u(x) = slope * x + p(x)`` of RP^1."""

    grid: PeriodicGrid
    periodic_part: np.ndarray
    slope: float = 1.0
    strict: bool = True

    geometry = "projective"

    def __post_init__(self):
        p = _as_finite(self.periodic_part, (self.grid.n,), "projective curve")
        object.__setattr__(self, "periodic_part", p)
        object.__setattr__(self, "slope", float(self.slope))
        if self.strict and self.derivative(1).min() <= GENERIC_TOL:
            raise DegenerateCurveError(
                f"u' must stay positive, min u' = {self.derivative(1).min():.3e}")

    @classmethod
    def from_function(cls, grid, periodic, slope=1.0, strict=True):
        return cls(grid, np.asarray(periodic(grid.points), dtype=float), slope, strict)

    @property
    def values(self):
        return self.slope * self.grid.points + self.periodic_part

    def as_gridfunction(self) -> GridFunction:
        return GridFunction(self.grid, self.values, self.slope)

    def derivative(self, order=1):
        d = spectral_derivative(self.periodic_part, self.grid.length, order)
        if order == 1:
            d = d + self.slope
        return d

    def with_periodic_part(self, periodic):
        return ProjectiveCurve(self.grid, periodic, self.slope, self.strict)


@dataclass(frozen=True, eq=False)
class StarCurve:
    """Planar curve ``gamma`` with monodromy ``[[1, 0], [c, 1]]`` (``c = monodromy_shift``)."""

    grid: PeriodicGrid
    points: np.ndarray
    monodromy_shift: float = 0.0
    strict: bool = True

    geometry = "star"

    def __post_init__(self):
        pts = _as_finite(self.points, (self.grid.n, 2), "star-shaped curve")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "monodromy_shift", float(self.monodromy_shift))
        if self.strict:
            det = self.det()
            if np.min(np.abs(det)) <= GENERIC_TOL or (det.max() > 0 > det.min()):
                raise DegenerateCurveError("star-shaped curve is degenerate: det(gamma, gamma') vanishes")

    @property
    def monodromy(self):
        return np.array([[1.0, 0.0], [self.monodromy_shift, 1.0]])

    def _parts(self):
        x = self.grid.points
        g1 = self.points[:, 0]
        lin = (self.monodromy_shift / self.grid.length) * g1
        q = self.points[:, 1] - x * lin
        return g1, q, lin

    @property
    def periodic_state(self):
        g1, q, _ = self._parts()
        return np.stack([g1, q], axis=1)

    @classmethod
    def from_periodic_state(cls, grid, state, monodromy_shift=0.0, strict=True):
        g1, q = state[:, 0], state[:, 1]
        g2 = q + grid.points * (monodromy_shift / grid.length) * g1
        return cls(grid, np.stack([g1, g2], axis=1), monodromy_shift, strict)

    def derivative(self, order=1):
        g1, q, lin = self._parts()
        L = self.grid.length
        d1 = spectral_derivative(g1, L, order)
        d2 = derivative_xlinear(q, lin, L, order)
        return np.stack([d1, d2], axis=1)

    def det(self):
        d = self.derivative(1)
        return self.points[:, 0] * d[:, 1] - self.points[:, 1] * d[:, 0]

    @property
    def normalized(self) -> bool:
        return bool(np.max(np.abs(self.det() - 1.0)) < GENERIC_TOL)


@dataclass(frozen=True, eq=False)
class LagrangianCurve:
    """Curve ``u(x) = slope * x + P(x)`` of symmetric matrices."""

    grid: PeriodicGrid
    periodic_part: np.ndarray
    slope: np.ndarray = None
    strict: bool = True

    geometry = "lagrangian"

    def __post_init__(self):
        P = np.asarray(self.periodic_part, dtype=float)
        if P.ndim != 3 or P.shape[0] != self.grid.n or P.shape[1] != P.shape[2]:
            raise ShapeMismatchError(f"Lagrangian curve needs shape (n, m, m), got {P.shape}")
        m = P.shape[1]
        slope = np.eye(m) if self.slope is None else self.slope
        slope = _as_finite(slope, (m, m), "slope")
        if not np.all(np.isfinite(P)):
            raise InvalidInputError("Lagrangian curve contains non-finite values")
        if np.max(np.abs(P - P.transpose(0, 2, 1))) > 1e-12 or np.max(np.abs(slope - slope.T)) > 1e-12:
            raise InvalidInputError("Lagrangian curve samples must be symmetric matrices")
        object.__setattr__(self, "periodic_part", 0.5 * (P + P.transpose(0, 2, 1)))
        object.__setattr__(self, "slope", 0.5 * (slope + slope.T))
        if self.strict:
            lo = np.linalg.eigvalsh(self.derivative(1)).min()
            if lo <= GENERIC_TOL:
                raise DegenerateCurveError(f"u' is not positive definite (min eigenvalue {lo:.3e})")

    @property
    def size(self) -> int:
        return self.periodic_part.shape[1]

    @property
    def matrices(self):
        return self.periodic_part + self.grid.points[:, None, None] * self.slope

    def derivative(self, order=1):
        d = spectral_derivative(self.periodic_part, self.grid.length, order)
        if order == 1:
            d = d + self.slope
        return d

    def with_periodic_part(self, periodic):
        return LagrangianCurve(self.grid, periodic, self.slope, self.strict)

    @classmethod
    def diagonal(cls, grid, periodic_parts, slopes=None, strict=True):
        m = len(periodic_parts)
        P = np.zeros((grid.n, m, m))
        for i, p in enumerate(periodic_parts):
            P[:, i, i] = p(grid.points) if callable(p) else p
        slope = np.eye(m) if slopes is None else np.diag(slopes)
        return cls(grid, P, slope, strict)


# ---------------------------------------------------------------------------
# operations


def reparametrize_arclength(c: EuclideanCurve, newton_steps: int = 8) -> EuclideanCurve:
    """Resample ``c`` at equal arc-length nodes.

    A monotone cubic fit of cumulative length gives the starting nodes;
    Newton iterations on the spectral interpolant then polish them, and the
    curve is resampled by trigonometric interpolation.
    """
    speed = c.speed()
    if speed.min() <= GENERIC_TOL:
        raise DegenerateCurveError(f"curve is not regular: min speed {speed.min():.3e}")
    grid = c.grid
    cum = antiderivative(GridFunction(grid, speed), 0.0)
    mean_speed = float(cum.slope)
    total = mean_speed * grid.length
    cum_periodic = cum.periodic_part
    new_grid = PeriodicGrid(grid.n, total)
    targets = new_grid.points

    theta_nodes = np.append(grid.points, grid.length)
    s_nodes = np.append(cum.values, total)
    theta = PchipInterpolator(s_nodes, theta_nodes)(targets)
    for _ in range(newton_steps):
        s_theta = mean_speed * theta + trig_interpolate(cum_periodic, grid.length, theta)
        v = trig_interpolate(speed, grid.length, theta)
        step = (s_theta - targets) / v
        theta = theta - step
        if np.max(np.abs(step)) < 1e-15 * grid.length:
            break

    periodic = trig_interpolate(c.periodic_part, grid.length, theta)
    pts = periodic + theta[:, None] * c.drift
    new_drift = c.drift * grid.length / total
    return EuclideanCurve(new_grid, pts, new_drift, c.strict)


def projective_to_star(u: ProjectiveCurve) -> StarCurve:
    """Centro-affine lift ``gamma = (u')^(-1/2) (1, u)``, so that ``det(gamma, gamma') = 1``."""
    u1 = u.derivative(1)
    if u1.min() <= GENERIC_TOL:
        raise DegenerateCurveError(f"u' must stay positive, min u' = {u1.min():.3e}")
    w = u1 ** -0.5
    pts = np.stack([w, w * u.values], axis=1)
    return StarCurve(u.grid, pts, u.slope * u.grid.length)


def star_to_projective(gamma: StarCurve) -> ProjectiveCurve:
    """Inverse of :func:`projective_to_star`: ``u = gamma_2 / gamma_1``."""
    g1 = gamma.points[:, 0]
    if np.min(np.abs(g1)) <= GENERIC_TOL:
        raise DegenerateCurveError("gamma_1 vanishes; the projective curve is undefined there")
    slope = gamma.monodromy_shift / gamma.grid.length
    u = gamma.points[:, 1] / g1
    return ProjectiveCurve(gamma.grid, u - slope * gamma.grid.points, slope)


@dataclass
class GenericityReport:
    geometry: str
    margins: dict
    passed: bool
    tolerance: float = GENERIC_TOL


def check_generic(c, tol: float = GENERIC_TOL) -> GenericityReport:
    """Genericity margins for any supported curve type."""
    if isinstance(c, EuclideanCurve):
        margins = {"min_speed": float(c.speed().min())}
        ok = margins["min_speed"] > tol
    elif isinstance(c, ProjectiveCurve):
        margins = {"min_u1": float(c.derivative(1).min())}
        ok = margins["min_u1"] > tol
    elif isinstance(c, StarCurve):
        det = c.det()
        margins = {"min_det": float(det.min()), "max_det": float(det.max())}
        ok = bool(np.min(np.abs(det)) > tol and not (det.max() > 0 > det.min()))
    elif isinstance(c, LagrangianCurve):
        margins = {"min_eig_u1": float(np.linalg.eigvalsh(c.derivative(1)).min())}
        ok = margins["min_eig_u1"] > tol
    else:
        raise InvalidInputError(f"unsupported curve type {type(c).__name__}")
    return GenericityReport(c.geometry, margins, bool(ok), tol)
