import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from geomflow.errors import InvalidInputError, MissingFieldError, ShapeMismatchError, UnsolvableError
from geomflow.hamiltonian import (
    CATALOG,
    Functional,
    euclid_P,
    hamiltonian_flow,
    poisson_catalog,
    variational_derivative,
)
from geomflow.invariants import curvature_torsion
from geomflow.numerics import GridFunction, PeriodicGrid, derivative, integrate, spectral_derivative
from geomflow.operators import DiffOperator, adjoint_residual, mul
from geomflow.verification import conformal_expanded_rate, saddle_curve


def field(grid, a=0.3, b=0.2, c=0.0):
    x = grid.points
    return GridFunction(grid, a * np.cos(x) + b * np.sin(2 * x) + c)


def fields_for(name, grid):
    k, t = field(grid), field(grid, 0.1, -0.2)
    if name.startswith("euclid"):
        return {"kappa": field(grid, 0.2, 0.1, 1.0), "tau": t}
    if name == "conformal-cc":
        return {"k1": k, "k2": t}
    if name == "lagrangian-diag":
        return {"s_d": [k, t]}
    return {"k": k}


@pytest.mark.parametrize("name", CATALOG)
def test_catalog_operators_are_skew(name):
    op = poisson_catalog(name, **fields_for(name, PeriodicGrid(128)))
    assert adjoint_residual(op, rng=np.random.default_rng(0)) < 1e-9


def test_multiplication_is_not_skew():
    grid = PeriodicGrid(64)
    assert adjoint_residual(mul(field(grid, c=1.0)), rng=np.random.default_rng(0)) > 0.1


def test_unknown_operator():
    with pytest.raises(InvalidInputError, match="unknown operator"):
        poisson_catalog("kdv-third", k=field(PeriodicGrid(16)))


@pytest.mark.parametrize("name,missing", [("kdv-second", {}), ("euclid-R", {"kappa": None}),
                                          ("lagrangian-diag", {})])
def test_missing_field(name, missing):
    with pytest.raises(MissingFieldError):
        poisson_catalog(name, **missing)


def test_rp1_with_zero_field(grid64):
    zero = GridFunction(grid64, np.zeros(64))
    f = field(grid64)
    got = poisson_catalog("rp1-reduced", k=zero).apply(f).values
    assert np.max(np.abs(got + 0.5 * spectral_derivative(f.values, grid64.length, 3))) < 1e-12


def test_euclid_R_on_unit_first_component(grid64):
    fl = fields_for("euclid-R", grid64)
    one, zero = GridFunction(grid64, np.ones(64)), GridFunction(grid64, np.zeros(64))
    out = poisson_catalog("euclid-R", **fl).apply([one, zero])
    ratio = fl["tau"].values / fl["kappa"].values
    assert np.max(np.abs(out[0].values)) < 1e-12
    assert np.max(np.abs(out[1].values - spectral_derivative(ratio, grid64.length, 1))) < 1e-12


def test_variational_derivative_quadratic(grid64):
    k = field(grid64)
    assert np.max(np.abs(variational_derivative(Functional(lambda a: 0.5 * a * a), k).values - k.values)) < 1e-9


def test_variational_derivative_gradient_energy(grid64):
    k = field(grid64)
    dh = variational_derivative(Functional(lambda a, a1: 0.5 * a1 * a1, order=1), k)
    assert np.max(np.abs(dh.values + derivative(k, 2).values)) < 1e-9


def test_variational_derivative_two_components(grid64):
    a, b = field(grid64), field(grid64, 0.1, 0.4)
    da, db = variational_derivative(Functional(lambda p, q: p * q, components=2), [a, b])
    assert np.max(np.abs(da.values - b.values)) < 1e-9
    assert np.max(np.abs(db.values - a.values)) < 1e-9


def test_functional_component_mismatch(grid64):
    with pytest.raises(ShapeMismatchError):
        variational_derivative(Functional(lambda p, q: p * q, components=2), field(grid64))


def test_functional_order_limit():
    with pytest.raises(InvalidInputError):
        Functional(lambda *j: j[0], order=5)


@given(seed=st.integers(0, 2 ** 31 - 1))
def test_discrete_gradient(seed):
    rng = np.random.default_rng(seed)
    grid = PeriodicGrid(64)
    k = GridFunction(grid, 0.3 * np.cos(grid.points + rng.normal()))
    v = GridFunction(grid, 0.2 * np.sin(2 * grid.points + rng.normal()))
    H = Functional(lambda a, a1: a ** 3 / 3 + 0.5 * a1 ** 2, order=1)
    eps = 1e-5
    fd = (H(k + v * eps) - H(k - v * eps)) / (2 * eps)
    pairing = integrate(variational_derivative(H, k) * v)
    assert abs(fd - pairing) < 1e-8


def test_euclid_P_zero_input():
    c = saddle_curve(128)
    inv = curvature_torsion(c)
    zero = GridFunction(inv.kappa.grid, np.zeros(128))
    out = euclid_P(inv.kappa, inv.tau)([zero, zero])
    assert max(np.max(np.abs(o.values)) for o in out) == 0.0


def test_euclid_P_frozen_values():
    c = saddle_curve(128)
    inv = curvature_torsion(c)
    assert c.grid.length == pytest.approx(6.8330325294027805, abs=1e-12)
    assert inv.kappa.values[0] == pytest.approx(2.0188360448900147, abs=1e-9)
    assert inv.tau.values[40] == pytest.approx(-0.4560319250688984, abs=1e-9)
    P = euclid_P(inv.kappa, inv.tau)
    zero = GridFunction(inv.kappa.grid, np.zeros(128))
    out0, out1 = P([inv.kappa, zero])
    assert out0.values[0] == pytest.approx(-2.942755418955912, rel=1e-7)
    assert out1.values[0] == pytest.approx(-36.30110094059729, rel=1e-7)
    assert out0.values[40] == pytest.approx(0.3476878403746273, rel=1e-7)
    assert out1.values[40] == pytest.approx(22.6286289312651, rel=1e-7)
    assert P.solve_residual([inv.kappa, zero]) < 1e-6


def test_euclid_P_circle_kills_constants(grid64):
    kappa = GridFunction(grid64, np.full(64, 0.5))
    tau = GridFunction(grid64, np.zeros(64))
    g = GridFunction(grid64, np.ones(64))
    out = euclid_P(kappa, tau)([g, GridFunction(grid64, np.zeros(64))])
    assert max(np.max(np.abs(o.values)) for o in out) < 1e-12


def test_euclid_P_unsolvable(grid64):
    kappa = field(grid64, 0.2, 0.0, 1.0)
    tau = GridFunction(grid64, np.zeros(64))
    # mean(kappa g') = 0.1 for g = sin x
    g = GridFunction(grid64, np.sin(grid64.points))
    with pytest.raises(UnsolvableError):
        euclid_P(kappa, tau)([g, GridFunction(grid64, np.zeros(64))])


def test_euclid_P_requires_positive_kappa(grid64):
    with pytest.raises(InvalidInputError):
        euclid_P(field(grid64), field(grid64))


def test_kdv_second_conserves_mass():
    grid = PeriodicGrid(64)
    H = Functional(lambda a: 0.5 * a * a, label="k^2/2")
    hist = hamiltonian_flow("kdv-second", H, field(grid), dt=1e-4, steps=20, stride=10)
    masses = [integrate(s) for s in hist.states]
    assert hist.status == "ok" and max(abs(m - masses[0]) for m in masses) < 1e-12


def test_kdv_first_translates():
    grid = PeriodicGrid(64)
    H = Functional(lambda a: 0.5 * a * a)
    k0 = field(grid)
    hist = hamiltonian_flow("kdv-first", H, k0, dt=1e-2, steps=10)
    shifted = 0.3 * np.cos(grid.points + 0.1) + 0.2 * np.sin(2 * (grid.points + 0.1))
    assert np.max(np.abs(hist.states[-1].values - shifted)) < 1e-9


def test_conformal_chain_expansion_matches_symbolic():
    # apply the operator symbolically to delta H = (k1, k2) and compare with the hand expansion
    x = sp.symbols("x")
    k1 = sp.Rational(3, 10) * sp.cos(x) + sp.Rational(1, 10) * sp.sin(2 * x)
    k2 = sp.Rational(1, 5) * sp.sin(x) - sp.Rational(1, 10) * sp.cos(3 * x)
    D = lambda f, n=1: sp.diff(f, x, n)  # noqa: E731
    rp1 = lambda k, f, s: s * (-D(f, 3) / 2 + k * D(f) + D(k * f))  # noqa: E731
    off = lambda k, f: k * D(f) + D(k * f)  # noqa: E731
    rows = [rp1(k1, k1, 1) + off(k2, k2), off(k2, k1) + rp1(k1, k2, -1)]
    grid = PeriodicGrid(64)
    sym = np.stack([sp.lambdify(x, r, "numpy")(grid.points) for r in rows])
    f1, f2 = (GridFunction(grid, sp.lambdify(x, k, "numpy")(grid.points)) for k in (k1, k2))
    applied = poisson_catalog("conformal-cc", k1=f1, k2=f2).apply([f1, f2])
    assert np.max(np.abs(np.stack([a.values for a in applied]) - sym)) < 1e-10
    hand = conformal_expanded_rate(np.stack([f1.values, f2.values]), grid.length)
    assert np.max(np.abs(hand - sym)) < 1e-10


def test_operator_algebra(grid64):
    D = DiffOperator.d(grid64)
    f = field(grid64)
    lhs = (D @ mul(f, "f")).apply(f).values
    assert np.max(np.abs(lhs - 2 * f.values * derivative(f).values)) < 1e-12
    assert (D - D).apply(f).max_abs() == 0.0
