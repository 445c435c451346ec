"""
Hamiltonian functionals, variational derivatives and the catalog of
Poisson operators for the KdV, RP^1, Euclidean, conformal and Lagrangian
reductions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    BlowUpError,
    InvalidInputError,
    MissingFieldError,
    ShapeMismatchError,
    UnsolvableError,
)
from .numerics import (
    GridFunction,
    derivative,
    integrate,
    antiderivative,
    rk4_step,
    spectral_derivative,
)
from .operators import DiffOperator, Primitive, adjoint_residual, apply, mul

MAX_JET_ORDER = 4
JET_STEP = 1e-6


@dataclass(frozen=True)
class Functional:
    """``H(k) = integral of density(jets)``.

    ``density`` receives ``order + 1`` arrays per component, component by
    component: ``(k, k', ..., k^(order))`` for one component,
    ``(a, a', ..., b, b', ...)`` for two.
    """

    density: Callable
    order: int = 0
    components: int = 1
    label: str = ""

    def __post_init__(self):
        if not 0 <= self.order <= MAX_JET_ORDER:
            raise InvalidInputError(f"density order must be in 0..{MAX_JET_ORDER}")

    def jets(self, k) -> list[np.ndarray]:
        parts = _components(k, self.components)
        out = []
        for f in parts:
            out.append(f.values)
            for j in range(1, self.order + 1):
                out.append(spectral_derivative(f.values, f.grid.length, j))
        return out

    def value(self, k) -> float:
        parts = _components(k, self.components)
        dens = np.asarray(self.density(*self.jets(k)), dtype=float)
        if not np.all(np.isfinite(dens)):
            raise InvalidInputError("density is not finite")
        return float(integrate(GridFunction(parts[0].grid, dens)))

    def __call__(self, k) -> float:
        return self.value(k)


def _components(k, count):
    parts = [k] if isinstance(k, GridFunction) else list(k)
    if len(parts) != count:
        raise ShapeMismatchError(f"functional has {count} component(s), got {len(parts)}")
    return parts


def variational_derivative(h: Functional, k):
    """Euler operator ``sum_j (-D)^j d(density)/d k^(j)``.

    Partials are central differences in jet coordinates with step
    ``1e-6 * max(1, |jet|)`` at each node.
    """
    parts = _components(k, h.components)
    jets = h.jets(k)
    base = np.asarray(h.density(*jets), dtype=float)
    if not np.all(np.isfinite(base)):
        raise InvalidInputError("density is not finite")
    per = h.order + 1
    out = []
    for c, f in enumerate(parts):
        acc = np.zeros(f.grid.n)
        for j in range(per):
            idx = c * per + j
            step = JET_STEP * np.maximum(1.0, np.abs(jets[idx]))
            plus = list(jets)
            minus = list(jets)
            plus[idx] = jets[idx] + step
            minus[idx] = jets[idx] - step
            partial = (np.asarray(h.density(*plus)) - np.asarray(h.density(*minus))) / (2 * step)
            acc = acc + (-1) ** j * spectral_derivative(partial, f.grid.length, j)
        out.append(GridFunction(f.grid, acc))
    return out[0] if isinstance(k, GridFunction) else out


# ---------------------------------------------------------------------------
# operator catalog

def _field(fields, name):
    if name not in fields or fields[name] is None:
        raise MissingFieldError(f"operator needs the invariant field {name!r}")
    f = fields[name]
    if not isinstance(f, GridFunction):
        raise InvalidInputError(f"field {name!r} must be a GridFunction")
    return f


def _rp1(k: GridFunction, sign: float = 1.0) -> DiffOperator:
    D = DiffOperator.d(k.grid)
    return sign * (-0.5 * (D @ D @ D) + mul(k, "k") @ D + D @ mul(k, "k"))


def _sym_pair(f: GridFunction, label: str) -> DiffOperator:
    D = DiffOperator.d(f.grid)
    return mul(f, label) @ D + D @ mul(f, label)


def _kdv_second(k: GridFunction) -> DiffOperator:
    D = DiffOperator.d(k.grid)
    return D @ D @ D + 2 * mul(k, "k") @ D + mul(derivative(k), "k'")


def _euclid(kappa: GridFunction, tau: GridFunction, which: str) -> DiffOperator:
    if np.min(kappa.values) <= 0:
        raise InvalidInputError("Euclidean operators need kappa > 0")
    grid = kappa.grid
    D = DiffOperator.d(grid)
    inv = GridFunction(grid, 1.0 / kappa.values)
    ratio = GridFunction(grid, tau.values / kappa.values)
    m_inv, m_ratio = mul(inv, "1/kappa"), mul(ratio, "tau/kappa")
    if which == "R":
        return DiffOperator.block([[D, m_ratio @ D],
                                   [D @ m_ratio, -D - D @ m_inv @ D @ m_inv @ D]])
    if which == "A":
        return DiffOperator.block([[0, 0], [0, m_inv @ D + D @ m_inv]])
    if which == "B":
        one, minus = (Primitive("const", 1.0),), (Primitive("const", -1.0),)
        return DiffOperator(grid, [[(), (one,)], [(minus,), ()]])
    if which == "C":
        return DiffOperator.block([[0, m_inv @ D], [D @ m_inv, 0]])
    raise InvalidInputError(f"unknown Euclidean operator {which!r}")


def _lagrangian_diag(s_d) -> DiffOperator:
    if isinstance(s_d, GridFunction):
        s_d = [s_d]
    s_d = list(s_d)
    grid = s_d[0].grid
    m = len(s_d)
    rows = [[0] * m for _ in range(m)]
    for i, s in enumerate(s_d):
        rows[i][i] = _kdv_second(s)
    if m == 1:
        return rows[0][0]
    return DiffOperator.block(rows)


CATALOG = ("kdv-first", "kdv-second", "rp1-reduced", "rp1-companion", "euclid-R",
           "euclid-A", "euclid-B", "euclid-C", "conformal-cc", "lagrangian-diag")

CATALOG_FIELDS = {
    "kdv-first": ("k",), "kdv-second": ("k",), "rp1-reduced": ("k",), "rp1-companion": ("k",),
    "euclid-R": ("kappa", "tau"), "euclid-A": ("kappa", "tau"), "euclid-B": ("kappa", "tau"),
    "euclid-C": ("kappa", "tau"), "conformal-cc": ("k1", "k2"), "lagrangian-diag": ("s_d",),
}


def poisson_catalog(name: str, **fields) -> DiffOperator:
    """Build a catalog operator from its invariant fields.

    ``k`` for the scalar operators, ``kappa`` and ``tau`` for ``euclid-*``,
    ``k1`` and ``k2`` for ``conformal-cc`` and ``s_d`` (sequence of
    GridFunctions) for ``lagrangian-diag``.  ``rp1-companion`` and
    ``kdv-first`` only use ``k`` for its grid.
    """
    if name not in CATALOG:
        raise InvalidInputError(f"unknown operator {name!r}; known: {list(CATALOG)}")
    if name == "lagrangian-diag":
        if fields.get("s_d") is None:
            raise MissingFieldError("operator needs the invariant field 's_d'")
        return _lagrangian_diag(fields["s_d"])
    if name == "conformal-cc":
        k1, k2 = _field(fields, "k1"), _field(fields, "k2")
        off = _sym_pair(k2, "k2")
        return _block2(_rp1(k1), off, off, _rp1(k1, -1.0))
    if name.startswith("euclid-"):
        return _euclid(_field(fields, "kappa"), _field(fields, "tau"), name.split("-")[1])
    k = _field(fields, "k")
    D = DiffOperator.d(k.grid)
    if name == "kdv-first":
        return D
    if name == "kdv-second":
        return _kdv_second(k)
    if name == "rp1-reduced":
        return _rp1(k)
    return 2 * D


def _block2(a, b, c, d):
    return DiffOperator(a.grid, [[a.entries[0][0], b.entries[0][0]],
                                 [c.entries[0][0], d.entries[0][0]]])


# ---------------------------------------------------------------------------
# nonlocal Euclidean operator

@dataclass(frozen=True)
class EuclidP:
    """``P = -R C^-1 R`` acting on ``(g, h)``, returning ``(kappa_t, tau_t)``.

    ``C^-1`` is fixed by taking zero integration constants in the
    antiderivatives of the rows of ``R (g, h)``; the constant in the second
    component of ``y`` is annihilated by ``R``.  :meth:`solve_residual`
    reports how well the chosen ``y`` solves ``C y = R (g, h)``.
    """

    kappa: GridFunction
    tau: GridFunction
    ordering: str = "(g, h) -> (kappa_t, tau_t)"
    R: DiffOperator = field(init=False, repr=False)
    C: DiffOperator = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "R", _euclid(self.kappa, self.tau, "R"))
        object.__setattr__(self, "C", _euclid(self.kappa, self.tau, "C"))

    def solvability_defect(self, g: GridFunction, h: GridFunction) -> float:
        """Mean of ``kappa g' + tau h'``; must vanish for ``C y = R (g, h)`` to be solvable."""
        k, t = self.kappa.values, self.tau.values
        L = self.kappa.grid.length
        val = k * spectral_derivative(g.values, L, 1) + t * spectral_derivative(h.values, L, 1)
        return float(np.mean(val))

    def apply(self, vec, tol: float = 1e-8):
        g, h = vec
        grid = self.kappa.grid
        scale = max(1.0, float(np.max(np.abs(g.values))) + float(np.max(np.abs(h.values))))
        defect = self.solvability_defect(g, h)
        if abs(defect) > tol * scale:
            raise UnsolvableError(
                f"C-solvability violated: mean(kappa g' + tau h') = {defect:.3e}", residual=defect)
        k, t = self.kappa.values, self.tau.values
        L = grid.length
        # rows of C y = R (g, h) with the outer D stripped, integration constants zero
        inner_term = spectral_derivative(h.values, L, 1) / k
        F = t * g.values / k - h.values - spectral_derivative(inner_term, L, 1) / k
        y1 = GridFunction(grid, k * F)
        rate = k * spectral_derivative(g.values, L, 1) + t * spectral_derivative(h.values, L, 1)
        y2 = antiderivative(GridFunction(grid, rate - np.mean(rate))).periodic_part
        y2 = GridFunction(grid, y2 - np.mean(y2))
        out = self.R.apply([y1, y2])
        return [-out[0], -out[1]]

    __call__ = apply

    def solve_residual(self, vec) -> float:
        """Relative defect of ``C y = R (g, h)`` for the ``y`` used by :meth:`apply`."""
        g, h = vec
        k, t = self.kappa.values, self.tau.values
        grid, L = self.kappa.grid, self.kappa.grid.length
        inner_term = spectral_derivative(h.values, L, 1) / k
        F = t * g.values / k - h.values - spectral_derivative(inner_term, L, 1) / k
        rate = k * spectral_derivative(g.values, L, 1) + t * spectral_derivative(h.values, L, 1)
        y = [GridFunction(grid, k * F),
             GridFunction(grid, antiderivative(GridFunction(grid, rate - np.mean(rate))).periodic_part)]
        lhs, rhs = self.C.apply(y), self.R.apply([g, h])
        num = max(float(np.max(np.abs(a.values - b.values))) for a, b in zip(lhs, rhs))
        den = max(float(np.max(np.abs(b.values))) for b in rhs)
        return num / den if den > 0 else num

    def describe(self) -> dict:
        return {"operator": "euclid-P", "definition": "-R C^-1 R", "ordering": self.ordering,
                "R": self.R.describe(), "C": self.C.describe()}


def euclid_P(kappa: GridFunction, tau: GridFunction) -> EuclidP:
    if np.min(kappa.values) <= 0:
        raise InvalidInputError("euclid_P needs kappa > 0")
    return EuclidP(kappa, tau)


# ---------------------------------------------------------------------------
# Hamiltonian evolution

@dataclass
class FieldHistory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    status: str = "ok"
    message: str = ""

    def array(self) -> np.ndarray:
        return np.asarray([[f.values for f in s] if isinstance(s, list) else s.values
                           for s in self.states])


def hamiltonian_flow(op, h: Functional, k0, dt: float, steps: int, stride: int = 1) -> FieldHistory:
    """Integrate ``k_t = P(k) (delta h / delta k)`` with RK4.

    ``op`` is a fixed :class:`DiffOperator`, a catalog name, or a callable
    mapping the current field(s) to an operator; name and callable are
    re-evaluated at every RK4 stage.
    """
    single = isinstance(k0, GridFunction)
    grid = (k0 if single else k0[0]).grid
    if isinstance(op, str):
        name = op
        op = lambda k: _catalog_from_state(name, k)  # noqa: E731

    def to_fields(arr):
        if single:
            return GridFunction(grid, arr)
        return [GridFunction(grid, a) for a in arr]

    def rhs(arr):
        k = to_fields(arr)
        P = op(k) if callable(op) and not isinstance(op, DiffOperator) else op
        dh = variational_derivative(h, k)
        out = P.apply(dh)
        return out.values if single else np.stack([o.values for o in out])

    state = k0.values.copy() if single else np.stack([f.values for f in k0])
    hist = FieldHistory([0.0], [to_fields(state)])
    try:
        for step in range(1, steps + 1):
            state = rk4_step(state, rhs, dt)
            if step % stride == 0 or step == steps:
                hist.times.append(step * dt)
                hist.states.append(to_fields(state))
    except BlowUpError as exc:
        hist.status = "blow-up"
        hist.message = str(exc)
    return hist


def _catalog_from_state(name, k):
    if name == "conformal-cc":
        return poisson_catalog(name, k1=k[0], k2=k[1])
    if name == "lagrangian-diag":
        return poisson_catalog(name, s_d=k)
    return poisson_catalog(name, k=k)


__all__ = [
    "CATALOG", "CATALOG_FIELDS", "EuclidP", "FieldHistory", "Functional", "adjoint_residual",
    "apply", "euclid_P", "hamiltonian_flow", "poisson_catalog", "variational_derivative",
]
