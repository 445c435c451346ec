"""
AKNS pairs ``(A, B)`` and the zero-curvature check ``A_t = B_x + [B, A]``
on recorded flow histories.

Time derivatives are taken post hoc from stored snapshots with the
fourth-order central stencil, so any recorded run (including data read
back from disk) can be checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import ProjectiveCurve
from .errors import InvalidInputError, PreconditionError, SingularOperatorError
from .frames import frenet_frame
from .invariants import curvature_torsion, schwarzian
from .numerics import PeriodicGrid, spectral_derivative

CONVENTIONS = ("consistent", "printed")


@dataclass(frozen=True)
class AknsPair:
    """Snapshot-sampled pair: ``A``, ``B`` of shape ``(T, n, m, m)`` at ``times``."""

    A: np.ndarray
    B: np.ndarray
    times: np.ndarray
    grid: PeriodicGrid
    lam: float
    algebra: str

    def algebra_defect(self) -> float:
        """Distance of ``A`` and ``B`` from the declared Lie algebra."""
        if self.algebra == "sl2":
            tr = lambda M: np.abs(np.trace(M, axis1=-2, axis2=-1))  # noqa: E731
            return float(max(tr(self.A).max(), tr(self.B).max()))
        sym = lambda M: np.abs(M + np.swapaxes(M, -1, -2))  # noqa: E731
        return float(max(sym(self.A).max(), sym(self.B).max()))

    def with_B(self, B) -> "AknsPair":
        return AknsPair(self.A, np.asarray(B), self.times, self.grid, self.lam, self.algebra)


@dataclass(frozen=True)
class ResidualReport:
    lam: float
    residual: float
    stencil_order_estimate: float = float("nan")

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "residual": self.residual,
                "stencil_order_estimate": self.stencil_order_estimate}


# ---------------------------------------------------------------------------
# KdV pair

def kdv_q(s, lam, convention="consistent"):
    """Potential ``q`` from the Schwarzian.

    ``printed``: ``q = S/2 + lam^2``.  ``consistent``: ``q = -(S/2 + lam^2)``,
    which makes ``A`` equal the Serret-Frenet matrix and ``B`` equal the
    induced frame evolution exactly.
    """
    if convention not in CONVENTIONS:
        raise InvalidInputError(f"convention must be one of {CONVENTIONS}")
    q = 0.5 * np.asarray(s) + lam ** 2
    return q if convention == "printed" else -q


def kdv_A(q, lam):
    q = np.asarray(q)
    A = np.empty(q.shape + (2, 2))
    A[..., 0, 0] = -lam
    A[..., 0, 1] = -1.0
    A[..., 1, 0] = -q
    A[..., 1, 1] = lam
    return A


def kdv_B(q, q1, q2, lam):
    q = np.asarray(q)
    B = np.empty(q.shape + (2, 2))
    B[..., 0, 0] = -0.5 * q1 - lam * q + 2 * lam ** 3
    B[..., 0, 1] = -q + 2 * lam ** 2
    B[..., 1, 0] = 0.5 * q2 + lam * q1 + q * (-q + 2 * lam ** 2)
    B[..., 1, 1] = 0.5 * q1 + lam * q - 2 * lam ** 3
    return B


def kdv_N(s, h, lam, length):
    """Induced frame evolution ``rho_t = N rho`` for ``u_t = u' h``."""
    h1 = spectral_derivative(h, length, 1)
    h2 = spectral_derivative(h, length, 2)
    N = np.empty(np.shape(h) + (2, 2))
    N[..., 0, 0] = -0.5 * h1 - lam * h
    N[..., 0, 1] = -h
    N[..., 1, 0] = 0.5 * h2 + lam * h1 + lam ** 2 * h + 0.5 * s * h
    N[..., 1, 1] = 0.5 * h1 + lam * h
    return N


def _snapshots(history):
    """Accept a FlowRun or a (times, curves) pair."""
    if hasattr(history, "snapshots"):
        return np.asarray(history.times, dtype=float), list(history.snapshots)
    times, curves = history
    return np.asarray(times, dtype=float), list(curves)


def kdv_akns_pair(history, lam: float, convention: str = "consistent") -> AknsPair:
    """KdV AKNS pair with ``q`` recomputed from every projective snapshot."""
    times, curves = _snapshots(history)
    if not curves or any(not isinstance(c, ProjectiveCurve) for c in curves):
        raise InvalidInputError("the KdV pair needs a history of projective curves")
    grid = curves[0].grid
    L = grid.length
    A, B = [], []
    for c in curves:
        q = kdv_q(schwarzian(c).s.values, lam, convention)
        A.append(kdv_A(q, lam))
        B.append(kdv_B(q, spectral_derivative(q, L, 1), spectral_derivative(q, L, 2), lam))
    return AknsPair(np.array(A), np.array(B), times, grid, float(lam), "sl2")


def n_matrix_consistency(u: ProjectiveCurve, lam: float) -> dict:
    """Compare ``B`` with the induced frame evolution ``N`` for ``h = q - 2 lam^2``.

    Reported for both sign conventions of ``q``; nothing is asserted.
    """
    s = schwarzian(u).s.values
    L = u.grid.length
    out = {}
    for conv in CONVENTIONS:
        q = kdv_q(s, lam, conv)
        B = kdv_B(q, spectral_derivative(q, L, 1), spectral_derivative(q, L, 2), lam)
        N = kdv_N(s, q - 2 * lam ** 2, lam, L)
        out[conv] = float(np.max(np.abs(B - N)))
    return out


# ---------------------------------------------------------------------------
# zero curvature

def _time_derivative(F, times):
    """Fourth-order central difference on interior snapshots (uniform spacing)."""
    if len(times) < 5:
        raise PreconditionError(f"need at least 5 snapshots for the time stencil, got {len(times)}")
    dt = np.diff(times)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, abs(dt[0])):
        raise PreconditionError("snapshots must be equally spaced in time")
    h = dt[0]
    return (-F[4:] + 8 * F[3:-1] - 8 * F[1:-3] + F[:-4]) / (12 * h)


def zero_curvature_field(pair: AknsPair) -> np.ndarray:
    """``A_t - B_x - [B, A]`` on interior snapshots."""
    At = _time_derivative(pair.A, pair.times)
    A, B = pair.A[2:-2], pair.B[2:-2]
    Bx = spectral_derivative(B, pair.grid.length, 1, axis=1)
    return At - Bx - (B @ A - A @ B)


def zero_curvature_residual(pair: AknsPair) -> float:
    return float(np.max(np.abs(zero_curvature_field(pair))))


def residual_report(pair: AknsPair) -> ResidualReport:
    """Residual plus an observed stencil order from halving the snapshot count.

    The coarse residual uses every other snapshot; the order estimate is
    ``log2(coarse / fine)`` and is meaningful only while the residual is
    dominated by time-stencil truncation.
    """
    fine = zero_curvature_residual(pair)
    order = float("nan")
    if len(pair.times) >= 9:
        coarse_pair = AknsPair(pair.A[::2], pair.B[::2], pair.times[::2], pair.grid,
                               pair.lam, pair.algebra)
        coarse = zero_curvature_residual(coarse_pair)
        if fine > 0 and coarse > 0:
            order = float(np.log2(coarse / fine))
    return ResidualReport(pair.lam, fine, order)


# ---------------------------------------------------------------------------
# gauges

def gauge_transform(K, g, g_x=None, length=None):
    """Gauge action on a coefficient matrix field.

    Constant ``g`` (shape ``(m, m)``): ``K -> g K g^-1``.  Field ``g`` (shape
    ``(n, m, m)``): ``K -> g_x g^-1 + g K g^-1``; ``g_x`` is computed
    spectrally from the periodic field if not supplied (``length`` needed).
    """
    K = np.asarray(getattr(K, "values", K))
    g = np.asarray(g, dtype=float)
    det = np.linalg.det(g)
    if np.min(np.abs(det)) < 1e-14:
        raise SingularOperatorError("gauge matrix is singular")
    ginv = np.linalg.inv(g)
    out = g @ K @ ginv
    if g.ndim == 3:
        if g_x is None:
            if length is None:
                raise InvalidInputError("x-dependent gauge needs g_x or the period length")
            g_x = spectral_derivative(g, length, 1)
        out = out + np.asarray(g_x) @ ginv
    return out


def lambda_gauge(lam: float) -> np.ndarray:
    """Constant gauge ``[[1, 0], [lam, 1]]`` removing ``lam`` from the Serret-Frenet diagonal."""
    return np.array([[1.0, 0.0], [lam, 1.0]])


def gauge_pair(pair: AknsPair, g) -> AknsPair:
    """Conjugate both members of the pair by a constant gauge."""
    g = np.asarray(g, dtype=float)
    return AknsPair(gauge_transform(pair.A, g), gauge_transform(pair.B, g), pair.times,
                    pair.grid, pair.lam, pair.algebra)


def constant_pair(A, B, times, grid, lam=0.0, algebra="sl2") -> AknsPair:
    """Pair with the same matrices at every node and time."""
    T, n = len(times), grid.n
    A = np.broadcast_to(np.asarray(A, dtype=float), (T, n) + np.shape(A)).copy()
    B = np.broadcast_to(np.asarray(B, dtype=float), (T, n) + np.shape(B)).copy()
    return AknsPair(A, B, np.asarray(times, dtype=float), grid, lam, algebra)


# ---------------------------------------------------------------------------
# Euclidean (NLS) pair measured from the frame

def euclidean_so3_matrix(kappa, tau, lam=0.0):
    """``[[0, k, 0], [-k, 0, t - lam], [0, -(t - lam), 0]]`` acting on rows ``(T, N, B)``."""
    kappa = np.asarray(kappa)
    K = np.zeros(kappa.shape + (3, 3))
    K[..., 0, 1] = kappa
    K[..., 1, 0] = -kappa
    K[..., 1, 2] = tau - lam
    K[..., 2, 1] = -(tau - lam)
    return K


def euclidean_frame_pair(history, lam: float = 0.0) -> AknsPair:
    """so(3) pair: ``A`` from curvature and torsion, ``B = rho_t rho^T`` measured.

    ``rho`` has rows ``T, N, B``; ``rho_t`` comes from the same time stencil
    as the residual, so the first and last two snapshots are dropped.  The
    measured ``B`` does not know ``lam``; only ``lam = 0`` is expected to
    close.
    """
    times, curves = _snapshots(history)
    frames = np.array([np.swapaxes(frenet_frame(c).as_columns(), 1, 2) for c in curves])
    A = np.array([euclidean_so3_matrix(inv.kappa.values, inv.tau.values, lam)
                  for inv in (curvature_torsion(c) for c in curves)])
    rho_t = _time_derivative(frames, times)
    B = rho_t @ np.swapaxes(frames[2:-2], -1, -2)
    B = 0.5 * (B - np.swapaxes(B, -1, -2))
    return AknsPair(A[2:-2], B, times[2:-2], curves[0].grid, float(lam), "so3")


__all__ = [
    "AknsPair", "CONVENTIONS", "ResidualReport", "constant_pair", "euclidean_frame_pair",
    "euclidean_so3_matrix", "gauge_pair", "gauge_transform", "kdv_A", "kdv_B", "kdv_N",
    "kdv_akns_pair", "kdv_q", "lambda_gauge", "n_matrix_consistency", "residual_report",
    "zero_curvature_field", "zero_curvature_residual",
]
