"""
Periodic-grid calculus.

Everything here works on uniform periodic grids with pseudo-spectral
(trigonometric interpolation) differentiation.  Fields that are periodic
only up to a linear drift (a curve in RP^1 with translation monodromy, a
helix) carry that drift explicitly as ``slope`` so that their derivatives
stay spectrally accurate.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BlowUpError,
    InvalidInputError,
    ShapeMismatchError,
    SingularOperatorError,
    UnsolvableError,
    UnsupportedOrderError,
)

MAX_DERIVATIVE_ORDER = 5


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid ``x_j = j L / n`` on ``[0, L)``."""

    n: int
    length: float = 2 * np.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise InvalidInputError(f"grid needs n >= 8 points, got {self.n}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise InvalidInputError(f"period must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @property
    def wavenumbers(self) -> np.ndarray:
        return _wavenumbers(self.n, float(self.length))


@functools.lru_cache(maxsize=64)
def _wavenumbers(n, length):
    k = np.fft.fftfreq(n, d=1.0 / n) * (2 * np.pi / length)
    k.setflags(write=False)
    return k


@functools.lru_cache(maxsize=32)
def differentiation_matrix(n, length):
    """Dense spectral first-derivative matrix (real, skew-symmetric)."""
    m = spectral_derivative(np.eye(n), length, 1)
    m.setflags(write=False)
    return m


def _check_finite(values, what="field"):
    if not np.all(np.isfinite(values)):
        raise InvalidInputError(f"{what} contains non-finite values")


def spectral_derivative(values, length, order=1, axis=0):
    """Pseudo-spectral derivative of periodic samples along ``axis``.

    The Nyquist mode is dropped for odd orders so that real data stays
    real and the first-derivative matrix is exactly skew-symmetric.
    """
    values = np.asarray(values)
    if order == 0:
        return values.copy()
    n = values.shape[axis]
    k = _wavenumbers(n, float(length))
    symbol = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        symbol = symbol.copy()
        symbol[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    out = np.fft.ifft(np.fft.fft(values, axis=axis) * symbol.reshape(shape), axis=axis)
    if np.isrealobj(values):
        return out.real
    return out


def derivative_xlinear(base, lin, length, order, axis=0):
    """Derivative of ``base(x) + x * lin(x)`` with both parts periodic."""
    x = np.arange(np.shape(base)[axis]) * (length / np.shape(base)[axis])
    shape = [1] * np.ndim(base)
    shape[axis] = -1
    x = x.reshape(shape)
    out = spectral_derivative(base, length, order, axis) + x * spectral_derivative(lin, length, order, axis)
    if order >= 1:
        out = out + order * spectral_derivative(lin, length, order - 1, axis)
    return out


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a field on a periodic grid.

    ``values`` are the full samples.  A nonzero ``slope`` declares that the
    field is ``slope * x`` plus a periodic function; the slope may be a
    scalar or an array matching the trailing value shape.
    """

    grid: PeriodicGrid
    values: np.ndarray
    slope: float | np.ndarray = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim == 0 or vals.shape[0] != self.grid.n:
            raise ShapeMismatchError(
                f"expected {self.grid.n} samples, got shape {vals.shape}")
        _check_finite(vals, "grid function")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid, func, slope=0.0):
        return cls(grid, np.asarray(func(grid.points)), slope)

    @property
    def has_slope(self) -> bool:
        return bool(np.any(np.asarray(self.slope) != 0))

    @property
    def periodic_part(self) -> np.ndarray:
        if not self.has_slope:
            return self.values
        x = self.grid.points.reshape((-1,) + (1,) * (self.values.ndim - 1))
        return self.values - x * np.asarray(self.slope)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def with_values(self, values, slope=0.0):
        return GridFunction(self.grid, values, slope)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.grid.n

    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise ShapeMismatchError("grid functions live on different grids")
            return other.values, other.slope
        return np.asarray(other), 0.0

    def __add__(self, other):
        vals, slope = self._coerce(other)
        return GridFunction(self.grid, self.values + vals, np.asarray(self.slope) + slope)

    __radd__ = __add__

    def __sub__(self, other):
        vals, slope = self._coerce(other)
        return GridFunction(self.grid, self.values - vals, np.asarray(self.slope) - slope)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return GridFunction(self.grid, -self.values, -np.asarray(self.slope))

    def __mul__(self, other):
        vals, slope = self._coerce(other)
        if np.ndim(vals) == 0:
            return GridFunction(self.grid, self.values * vals, np.asarray(self.slope) * vals)
        if self.has_slope or np.any(np.asarray(slope) != 0):
            raise InvalidInputError("product of non-periodic grid functions is not representable")
        return GridFunction(self.grid, self.values * vals)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class MatrixField:
    """An (m x m)-matrix valued grid function, optionally tied to a spectral parameter."""

    grid: PeriodicGrid
    values: np.ndarray
    lam: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 3 or vals.shape[0] != self.grid.n or vals.shape[1] != vals.shape[2]:
            raise ShapeMismatchError(
                f"matrix field must have shape (n, m, m) with n={self.grid.n}, got {vals.shape}")
        _check_finite(vals, "matrix field")
        object.__setattr__(self, "values", vals)

    @property
    def shape(self):
        return self.values.shape[1:]

    def __getitem__(self, idx):
        return self.values[(slice(None),) + tuple(np.atleast_1d(idx))]


def derivative(f: GridFunction, order: int = 1) -> GridFunction:
    """``order``-th spatial derivative of ``f`` (orders 0..5)."""
    if order < 0 or order > MAX_DERIVATIVE_ORDER or int(order) != order:
        raise UnsupportedOrderError(
            f"derivative order must be in 0..{MAX_DERIVATIVE_ORDER}, got {order}")
    _check_finite(f.values)
    if order == 0:
        return f
    out = spectral_derivative(f.periodic_part, f.grid.length, order)
    if order == 1 and f.has_slope:
        out = out + np.asarray(f.slope)
    return GridFunction(f.grid, out)


def integrate(f) -> complex | float:
    """Periodic trapezoid rule ``dx * sum(f_j)``."""
    if isinstance(f, GridFunction):
        values, dx = f.values, f.grid.dx
    else:
        raise InvalidInputError("integrate expects a GridFunction")
    _check_finite(values)
    total = dx * np.sum(values, axis=0)
    return total.item() if np.ndim(total) == 0 else total


def inner(a: GridFunction, b: GridFunction) -> float:
    """``integrate(a * b)`` summed over any trailing components."""
    return float(np.real(a.grid.dx * np.sum(np.asarray(a.values) * np.asarray(b.values))))


def antiderivative(f: GridFunction, base_point_value=0.0) -> GridFunction:
    """Primitive ``F`` with ``F' = f`` and ``F(0) = base_point_value``.

    A nonzero mean of ``f`` becomes the declared linear part (``slope``)
    of the result.
    """
    if f.has_slope:
        raise InvalidInputError("antiderivative expects a periodic integrand")
    vals = f.values
    _check_finite(vals)
    n = f.grid.n
    mean = vals.mean(axis=0)
    k = f.grid.wavenumbers
    fhat = np.fft.fft(vals - mean, axis=0)
    shape = (-1,) + (1,) * (vals.ndim - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(k == 0, 0.0, 1.0 / (1j * np.where(k == 0, 1.0, k)))
    if n % 2 == 0:
        inv[n // 2] = 0.0
    periodic = np.fft.ifft(fhat * inv.reshape(shape), axis=0)
    if np.isrealobj(vals):
        periodic = periodic.real
    periodic = periodic - periodic[0]
    x = f.grid.points.reshape(shape)
    out = base_point_value + periodic + x * mean
    slope = mean.item() if np.ndim(mean) == 0 else mean
    return GridFunction(f.grid, out, slope)


def _stack_blocks(rhs):
    if isinstance(rhs, GridFunction):
        return rhs.grid, [rhs]
    rhs = list(rhs)
    if not rhs or not all(isinstance(r, GridFunction) for r in rhs):
        raise InvalidInputError("right-hand side must be a GridFunction or a sequence of them")
    grid = rhs[0].grid
    if any(r.grid != grid for r in rhs):
        raise ShapeMismatchError("right-hand side components live on different grids")
    return grid, rhs


def solve_operator(Lop, rhs, tol=1e-8):
    """Solve ``Lop y = rhs`` on periodic functions.

    The operator is discretized densely (``Lop.matrix()``) and solved through
    its SVD.  Components of ``rhs`` outside the range of the operator raise
    :class:`UnsolvableError`; the kernel freedom is used to make every block
    component of ``y`` mean-zero, with any leftover freedom resolved by the
    minimum-norm choice.
    """
    grid, parts = _stack_blocks(rhs)
    nblocks = len(parts)
    if getattr(Lop, "nblocks", 1) != nblocks:
        raise ShapeMismatchError(
            f"operator has {Lop.nblocks} blocks but rhs has {nblocks} components")
    for p in parts:
        if p.has_slope:
            raise InvalidInputError("solve_operator works on periodic right-hand sides")
    r = np.concatenate([p.values for p in parts])
    _check_finite(r, "right-hand side")
    M = Lop.matrix()
    if M.shape != (r.size, r.size):
        raise ShapeMismatchError(f"operator matrix {M.shape} does not match rhs size {r.size}")

    U, s, Vh = np.linalg.svd(M)
    if s[0] == 0.0:
        raise SingularOperatorError("operator is identically zero")
    rank = int(np.sum(s > 1e-9 * s[0]))
    rnorm = np.linalg.norm(r)
    if rnorm == 0.0:
        y = np.zeros(Vh.shape[1], dtype=np.result_type(M, r))
    else:
        left_null = U[:, rank:]
        violation = np.linalg.norm(left_null.conj().T @ r) / rnorm
        if violation > tol:
            raise UnsolvableError(
                f"right-hand side violates the solvability (mean) conditions "
                f"of the operator: relative residual {violation:.3e}", violation)
        y = Vh[:rank].conj().T @ ((U[:, :rank].conj().T @ r) / s[:rank])

    kernel = Vh[rank:].conj().T
    n = grid.n
    if kernel.shape[1]:
        E = np.zeros((nblocks, r.size))
        for b in range(nblocks):
            E[b, b * n:(b + 1) * n] = 1.0 / n
        c, *_ = np.linalg.lstsq(E @ kernel, -(E @ y), rcond=None)
        y = y + kernel @ c

    resid = np.max(np.abs(M @ y - r))
    if resid > tol * max(np.max(np.abs(r)), 1e-300) and rnorm > 0:
        raise SingularOperatorError(
            f"discretized operator is too ill-conditioned: residual {resid:.3e}")
    if np.isrealobj(M) and np.isrealobj(r):
        y = y.real
    out = [GridFunction(grid, y[b * n:(b + 1) * n]) for b in range(nblocks)]
    return out[0] if isinstance(rhs, GridFunction) else out


def rk4_step(state, rhs_fn: Callable, dt: float):
    """One classical fourth-order Runge-Kutta step.

    Raises :class:`BlowUpError` (carrying the input state) if the update is
    not finite.
    """
    if not dt > 0:
        raise InvalidInputError(f"time step must be positive, got {dt}")
    k1 = rhs_fn(state)
    k2 = rhs_fn(state + 0.5 * dt * k1)
    k3 = rhs_fn(state + 0.5 * dt * k2)
    k4 = rhs_fn(state + dt * k3)
    new = state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(new)):
        raise BlowUpError("non-finite state after RK4 step (CFL violation or blow-up)",
                          last_state=state)
    return new


def rk4_integrate(state, rhs_fn, t_final, max_dt):
    """Integrate over ``[0, t_final]`` with equal RK4 steps no larger than ``max_dt``.

    Negative ``t_final`` integrates backward in time.
    """
    if t_final == 0:
        return state
    sign = 1.0 if t_final > 0 else -1.0
    steps = max(1, int(np.ceil(abs(t_final) / max_dt - 1e-9)))
    h = abs(t_final) / steps
    fn = rhs_fn if sign > 0 else (lambda s: -rhs_fn(s))
    for _ in range(steps):
        state = rk4_step(state, fn, h)
    return state


def stable_dt(grid: PeriodicGrid, order: int, coefficient: float = 1.0,
              field_scale: float = 0.0, safety: float = 0.8) -> float:
    """Explicit RK4 time step for a dispersive term ``c D^order``.

    RK4 is stable on the imaginary axis up to |z| = 2*sqrt(2); the largest
    resolved wavenumber is about ``pi / dx``.
    """
    kmax = np.pi / grid.dx
    if coefficient == 0:
        return float("inf")
    return safety * 2 * np.sqrt(2) / (abs(coefficient) * kmax ** order) / max(1.0, field_scale)


def dealias(values, axis=0):
    """Zero the upper third of the spectrum (2/3 rule)."""
    values = np.asarray(values)
    axis = axis % values.ndim
    n = values.shape[axis]
    fhat = np.fft.fft(values, axis=axis)
    cutoff = n // 3
    modes = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    mask = (modes <= cutoff).reshape([-1 if i == axis else 1 for i in range(values.ndim)])
    out = np.fft.ifft(fhat * mask, axis=axis)
    return out.real if np.isrealobj(values) else out


def trig_interpolate(values, length, x_eval):
    """Evaluate the trigonometric interpolant of periodic samples at arbitrary points."""
    values = np.asarray(values)
    n = values.shape[0]
    k = _wavenumbers(n, float(length))
    coeffs = np.fft.fft(values, axis=0) / n
    if n % 2 == 0:
        # split the Nyquist mode symmetrically so real data interpolates to real values
        coeffs = coeffs.copy()
        nyq = coeffs[n // 2].copy()
        coeffs[n // 2] = nyq / 2
        coeffs = np.concatenate([coeffs, (nyq / 2)[None]], axis=0)
        k = np.concatenate([k, [-k[n // 2]]])
    phase = np.exp(1j * np.outer(np.asarray(x_eval), k))
    out = phase @ coeffs.reshape(len(k), -1)
    out = out.reshape((len(np.atleast_1d(x_eval)),) + values.shape[1:])
    return out.real if np.isrealobj(values) else out


def fornberg_weights(x0: float, nodes: Sequence[float], order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``x0``."""
    nodes = np.asarray(nodes, dtype=float)
    m = len(nodes)
    c = np.zeros((m, order + 1))
    c1, c4 = 1.0, nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, m):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def window_derivative(x, values, order, accuracy=6):
    """Derivative of samples on a non-periodic uniform window.

    Interior nodes use centred stencils; nodes near the ends fall back to
    one-sided stencils of the same width, so every node gets at least
    ``accuracy``-order accuracy.
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values)
    n = len(x)
    width = order + accuracy
    if width % 2 == 0:
        width += 1
    if n < width:
        raise InvalidInputError(f"window of {n} points is too short for a {width}-point stencil")
    half = width // 2
    out = np.empty_like(values, dtype=np.result_type(values, float))
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        idx = np.arange(lo, lo + width)
        w = fornberg_weights(x[i], x[idx], order)
        out[i] = np.tensordot(w, values[idx], axes=(0, 0))
    return out
