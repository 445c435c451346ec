"""
Moving frames and their Serret-Frenet matrices.

* the classical Frenet frame of a space curve;
* the PSL(2) right moving frame of a curve in RP^1 obtained by
  normalizing ``rho . u = 0``, ``rho . u_1 = 1``, ``rho . u_2 = 2 lambda``;
* the affine Euclidean frame ``[[1, 0], [u, (T N B)]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import GENERIC_TOL, EuclideanCurve, ProjectiveCurve
from .errors import DegenerateCurveError, FrameDegenerateError, InconsistencyError
from .invariants import curvature_torsion, schwarzian
from .numerics import MatrixField, derivative_xlinear, spectral_derivative

SF_CHECK_TOL = 1e-6
SF_FAIL_TOL = 1e-4


@dataclass(frozen=True)
class FrenetFrame:
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray

    def as_columns(self) -> np.ndarray:
        """Rotation field with columns T, N, B, shape (n, 3, 3)."""
        return np.stack([self.T, self.N, self.B], axis=2)


@dataclass(frozen=True)
class PSL2Frame:
    rho: MatrixField
    lam: float
    # rho = base + x * lin with periodic parts, kept for exact spectral x-derivatives
    base: np.ndarray = field(repr=False, default=None)
    lin: np.ndarray = field(repr=False, default=None)

    def derivative(self) -> np.ndarray:
        return derivative_xlinear(self.base, self.lin, self.rho.grid.length, 1)


@dataclass(frozen=True)
class SerretFrenetMatrix:
    K: MatrixField
    geometry: str
    residual: float = float("nan")


def frenet_frame(c: EuclideanCurve) -> FrenetFrame:
    d1, d2 = c.derivative(1), c.derivative(2)
    cross = np.cross(d1, d2)
    cnorm = np.linalg.norm(cross, axis=1)
    speed = np.linalg.norm(d1, axis=1)
    if np.min(cnorm / speed ** 3) < GENERIC_TOL:
        raise FrameDegenerateError("curvature vanishes; Frenet frame undefined")
    T = d1 / speed[:, None]
    B = cross / cnorm[:, None]
    N = np.cross(B, T)
    return FrenetFrame(T, N, B)


def frenet_relations_residual(c: EuclideanCurve, frame: FrenetFrame | None = None) -> float:
    """Max defect of ``T' = kN``, ``N' = -kT + tB``, ``B' = -tN`` (derivatives in arc length)."""
    frame = frame or frenet_frame(c)
    inv = curvature_torsion(c)
    k, t = inv.kappa.values[:, None], inv.tau.values[:, None]
    speed = c.speed()[:, None]
    L = c.grid.length
    dT, dN, dB = (spectral_derivative(v, L, 1) / speed for v in (frame.T, frame.N, frame.B))
    res = [dT - k * frame.N, dN + k * frame.T - t * frame.B, dB + t * frame.N]
    return float(max(np.max(np.abs(r)) for r in res))


def mobius_prolonged(g, u, u1, u2):
    """Prolonged fractional-linear action of ``g = [[a, b], [c, d]]`` on ``(u, u_1, u_2)``.

    ``g`` may be a single matrix or a field of matrices, shape (n, 2, 2).
    """
    g = np.asarray(g)
    a, b, c, d = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
    det = a * d - b * c
    den = c * u + d
    gu = (a * u + b) / den
    gu1 = det * u1 / den ** 2
    gu2 = det * (u2 / den ** 2 - 2 * c * u1 ** 2 / den ** 3)
    return gu, gu1, gu2


def psl2_frame(u: ProjectiveCurve, lam: float = 0.0) -> PSL2Frame:
    """Closed-form normalization frame

    ``rho = [[1, 0], [u2/(2 u1) - lam, 1]] diag(u1^-1/2, u1^1/2) [[1, -u], [0, 1]]``.
    """
    u1 = u.derivative(1)
    if u1.min() <= GENERIC_TOL:
        raise DegenerateCurveError(f"u' must stay positive, min u' = {u1.min():.3e}")
    u2 = u.derivative(2)
    w = u1 ** -0.5
    sigma = 0.5 * u2 / u1 - lam
    p, m = u.periodic_part, u.slope
    n = u.grid.n
    base = np.empty((n, 2, 2))
    lin = np.zeros((n, 2, 2))
    base[:, 0, 0] = w
    base[:, 0, 1] = -w * p
    base[:, 1, 0] = sigma * w
    base[:, 1, 1] = -sigma * w * p + 1.0 / w
    lin[:, 0, 1] = -m * w
    lin[:, 1, 1] = -m * sigma * w
    rho = base + u.grid.points[:, None, None] * lin
    return PSL2Frame(MatrixField(u.grid, rho, lam), lam, base, lin)


def normalization_residuals(frame: PSL2Frame, u: ProjectiveCurve) -> dict:
    """Defects of the three normalization equations and of ``det rho = 1``."""
    gu, gu1, gu2 = mobius_prolonged(frame.rho.values, u.values, u.derivative(1), u.derivative(2))
    det = np.linalg.det(frame.rho.values)
    return {
        "rho.u": float(np.max(np.abs(gu))),
        "rho.u1": float(np.max(np.abs(gu1 - 1.0))),
        "rho.u2": float(np.max(np.abs(gu2 - 2 * frame.lam))),
        "det": float(np.max(np.abs(det - 1.0))),
    }


def psl2_sf_matrix(s, lam):
    """``[[-lam, -1], [S/2 + lam^2, lam]]`` for a Schwarzian field ``s``."""
    s = np.asarray(s)
    K = np.empty(s.shape + (2, 2))
    K[..., 0, 0] = -lam
    K[..., 0, 1] = -1.0
    K[..., 1, 0] = 0.5 * s + lam ** 2
    K[..., 1, 1] = lam
    return K


def psl2_serret_frenet(frame: PSL2Frame, u: ProjectiveCurve) -> SerretFrenetMatrix:
    """Right Serret-Frenet matrix ``K`` with ``rho_x = K rho``, checked against spectral ``rho_x``."""
    s = schwarzian(u).s.values
    K = psl2_sf_matrix(s, frame.lam)
    rho_x = frame.derivative()
    residual = float(np.max(np.abs(rho_x - K @ frame.rho.values)))
    if residual > SF_FAIL_TOL:
        raise InconsistencyError(
            f"rho_x - K rho = {residual:.3e}; frame and curve disagree or discretization broke down")
    return SerretFrenetMatrix(MatrixField(u.grid, K, frame.lam), "psl2", residual)


def euclidean_frame(c: EuclideanCurve) -> np.ndarray:
    """Affine frame ``[[1, 0], [u, (T N B)]]``, shape (n, 4, 4)."""
    fr = frenet_frame(c)
    rho = np.zeros((c.grid.n, 4, 4))
    rho[:, 0, 0] = 1.0
    rho[:, 1:, 0] = c.points
    rho[:, 1:, 1:] = fr.as_columns()
    return rho


def euclidean_sf_matrix(kappa, tau, speed=1.0):
    kappa = np.asarray(kappa)
    K = np.zeros(kappa.shape + (4, 4))
    K[..., 1, 0] = speed
    K[..., 1, 2] = -kappa * speed
    K[..., 2, 1] = kappa * speed
    K[..., 2, 3] = -tau * speed
    K[..., 3, 2] = tau * speed
    return K


def euclidean_serret_frenet(c: EuclideanCurve) -> SerretFrenetMatrix:
    """Left Serret-Frenet matrix ``K = rho^-1 rho_x`` of the affine Euclidean frame.

    On arc-length curves the first column is ``e_1`` and the so(3) block is
    built from curvature and torsion.
    """
    inv = curvature_torsion(c)
    speed = c.speed()
    K = euclidean_sf_matrix(inv.kappa.values, inv.tau.values, speed)
    fr = frenet_frame(c)
    L = c.grid.length
    rho = euclidean_frame(c)
    rho_x = np.zeros_like(rho)
    rho_x[:, 1:, 0] = c.derivative(1)
    rho_x[:, 1:, 1:] = spectral_derivative(fr.as_columns(), L, 1)
    residual = float(np.max(np.abs(rho_x - rho @ K)))
    if residual > SF_FAIL_TOL:
        raise InconsistencyError(f"rho_x - rho K = {residual:.3e}")
    return SerretFrenetMatrix(MatrixField(c.grid, K), "euclidean", residual)
