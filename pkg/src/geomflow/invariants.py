"""
Differential invariants: Euclidean curvature and torsion, the Hasimoto
function, the Schwarzian derivative, centro-affine curvature and the
Lagrangian Schwarzian with a continuously tracked diagonalization.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .curves import (
    GENERIC_TOL,
    EuclideanCurve,
    LagrangianCurve,
    ProjectiveCurve,
    StarCurve,
)
from .errors import DegenerateCurveError, FrameDegenerateError, PreconditionError
from .numerics import GridFunction, MatrixField, antiderivative, window_derivative


class NearDegenerateWarning(UserWarning):
    """Eigenvalues of the Lagrangian Schwarzian nearly collide."""


@dataclass(frozen=True)
class EuclideanInvariants:
    kappa: GridFunction
    tau: GridFunction


@dataclass(frozen=True)
class NaturalInvariants:
    nu: GridFunction
    eta: GridFunction
    phi: GridFunction
    gauge_base: float
    phase_slope: float


@dataclass(frozen=True)
class SchwarzianInvariant:
    s: GridFunction


@dataclass(frozen=True)
class LagrangianSchwarzian:
    s_matrix: MatrixField
    s_d: np.ndarray          # (n, m) tracked eigenvalues
    theta: MatrixField       # rows are eigenvectors: theta s theta^T = diag(s_d)
    ordering_seed: str = "ascending-at-x0"


@dataclass(frozen=True)
class CentroAffineInvariant:
    p: GridFunction
    residual: float


def curvature_torsion(c: EuclideanCurve) -> EuclideanInvariants:
    """Curvature and torsion with respect to arc length.

    Uses the parametrization-independent formulas, which reduce to
    ``|u''|`` and ``det(u', u'', u''') / |u''|^2`` on arc-length curves.
    """
    d1, d2, d3 = c.derivative(1), c.derivative(2), c.derivative(3)
    cross = np.cross(d1, d2)
    cnorm = np.linalg.norm(cross, axis=1)
    speed = np.linalg.norm(d1, axis=1)
    kappa = cnorm / speed ** 3
    if kappa.min() < GENERIC_TOL:
        raise FrameDegenerateError(f"curvature vanishes (min {kappa.min():.3e}); torsion undefined")
    tau = np.einsum("ij,ij->i", cross, d3) / cnorm ** 2
    return EuclideanInvariants(GridFunction(c.grid, kappa), GridFunction(c.grid, tau))


def hasimoto(inv: EuclideanInvariants, base: int = 0) -> NaturalInvariants:
    """Hasimoto function ``phi = kappa exp(i int_{x_base}^x tau)``.

    The mean torsion is kept as a linear phase (``phase_slope``); the
    constant phase is fixed by the base node.
    """
    phase = antiderivative(inv.tau, 0.0)
    theta = phase.values - phase.values[base]
    phi = inv.kappa.values * np.exp(1j * theta)
    grid = inv.kappa.grid
    return NaturalInvariants(
        nu=GridFunction(grid, phi.real),
        eta=GridFunction(grid, phi.imag),
        phi=GridFunction(grid, phi),
        gauge_base=float(grid.points[base]),
        phase_slope=float(phase.slope),
    )


def schwarzian_from_derivatives(u1, u2, u3):
    return u3 / u1 - 1.5 * (u2 / u1) ** 2


def schwarzian(u: ProjectiveCurve) -> SchwarzianInvariant:
    """``S(u) = u'''/u' - 3/2 (u''/u')^2`` as a periodic field."""
    u1 = u.derivative(1)
    if u1.min() <= GENERIC_TOL:
        raise DegenerateCurveError(f"u' must stay positive, min u' = {u1.min():.3e}")
    s = schwarzian_from_derivatives(u1, u.derivative(2), u.derivative(3))
    return SchwarzianInvariant(GridFunction(u.grid, s))


def schwarzian_window(x, values, accuracy=8):
    """Schwarzian of samples on a non-periodic uniform window (finite differences)."""
    u1 = window_derivative(x, values, 1, accuracy)
    if np.min(u1) <= 0 and np.max(u1) >= 0:
        raise DegenerateCurveError("u' changes sign on the window")
    u2 = window_derivative(x, values, 2, accuracy)
    u3 = window_derivative(x, values, 3, accuracy)
    return schwarzian_from_derivatives(u1, u2, u3)


def _sym_inverse_sqrt(m):
    w, v = np.linalg.eigh(m)
    return np.einsum("...ij,...j,...kj->...ik", v, w ** -0.5, v)


def lagrangian_schwarzian_matrix(u1, u2, u3):
    """Pointwise ``u1^(-1/2) (u3 - 3/2 u2 u1^(-1) u2) u1^(-1/2)``."""
    w = np.linalg.eigvalsh(u1)
    if w.min() <= GENERIC_TOL:
        raise DegenerateCurveError(f"u' is not positive definite (min eigenvalue {w.min():.3e})")
    r = _sym_inverse_sqrt(u1)
    inner = u3 - 1.5 * u2 @ np.linalg.solve(u1, u2)
    s = r @ inner @ r
    return 0.5 * (s + np.swapaxes(s, -1, -2))


def track_eigensystem(s, gap_tol=1e-10):
    """Eigen-decompose a symmetric matrix field with continuous branch ordering.

    Ascending order at the first node; afterwards each eigenvector is matched
    to the previous node by maximal overlap and its sign fixed so that the
    overlap is nonnegative.
    """
    n, m, _ = s.shape
    evals = np.empty((n, m))
    evecs = np.empty((n, m, m))
    w, v = np.linalg.eigh(s[0])
    evals[0], evecs[0] = w, v
    close = 0
    warned = False
    for j in range(1, n):
        w, v = np.linalg.eigh(s[j])
        overlap = evecs[j - 1].T @ v
        rows, cols = linear_sum_assignment(-np.abs(overlap))
        perm = cols[np.argsort(rows)]
        w, v = w[perm], v[:, perm]
        signs = np.sign(np.einsum("ij,ij->j", evecs[j - 1], v))
        signs[signs == 0] = 1.0
        v = v * signs
        evals[j], evecs[j] = w, v
        gap = np.min(np.diff(np.sort(w))) if m > 1 else np.inf
        close = close + 1 if gap < gap_tol else 0
        if close >= 2 and not warned:
            warnings.warn("Lagrangian Schwarzian eigenvalues collide over an interval; "
                          "ordering follows eigenvector continuity", NearDegenerateWarning)
            warned = True
    return evals, evecs


def lagrangian_schwarzian(c: LagrangianCurve) -> LagrangianSchwarzian:
    s = lagrangian_schwarzian_matrix(c.derivative(1), c.derivative(2), c.derivative(3))
    evals, evecs = track_eigensystem(s)
    theta = np.swapaxes(evecs, 1, 2)
    return LagrangianSchwarzian(MatrixField(c.grid, s), evals, MatrixField(c.grid, theta))


def centroaffine_curvature(c: StarCurve) -> CentroAffineInvariant:
    """``p`` with ``gamma'' = p gamma`` on a curve parametrized by centro-affine arc length."""
    det = c.det()
    if np.max(np.abs(det - 1.0)) > GENERIC_TOL:
        raise PreconditionError(
            f"star curve is not normalized: max |det(gamma, gamma') - 1| = {np.max(np.abs(det - 1)):.3e}")
    d1, d2 = c.derivative(1), c.derivative(2)
    p = d2[:, 0] * d1[:, 1] - d2[:, 1] * d1[:, 0]
    residual = float(np.max(np.abs(d2 - p[:, None] * c.points)))
    return CentroAffineInvariant(GridFunction(c.grid, p), residual)
