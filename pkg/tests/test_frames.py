import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geomflow.curves import EuclideanCurve, ProjectiveCurve, reparametrize_arclength
from geomflow.errors import FrameDegenerateError, InconsistencyError
from geomflow.frames import (
    euclidean_frame,
    euclidean_serret_frenet,
    frenet_frame,
    frenet_relations_residual,
    mobius_prolonged,
    normalization_residuals,
    psl2_frame,
    psl2_serret_frenet,
    psl2_sf_matrix,
)
from geomflow.numerics import PeriodicGrid


def line(grid):
    return ProjectiveCurve(grid, np.zeros(grid.n), 1.0)


def test_circle_binormal_constant(grid64):
    c = EuclideanCurve.from_function(grid64, lambda t: np.stack([np.cos(t), np.sin(t), 0 * t], 1))
    fr = frenet_frame(c)
    assert np.max(np.abs(fr.B - [0, 0, 1])) < 1e-12


def test_helix_frenet_relations(grid64):
    c = EuclideanCurve.from_function(grid64, lambda t: np.stack([np.cos(t), np.sin(t), 0.5 * t], 1),
                                     drift=(0, 0, 0.5))
    assert frenet_relations_residual(reparametrize_arclength(c)) < 1e-6


def test_segment_degenerate(grid64):
    c = EuclideanCurve.from_function(grid64, lambda t: np.stack([t, 0 * t, 0 * t], 1), drift=(1, 0, 0))
    with pytest.raises(FrameDegenerateError):
        frenet_frame(c)


def test_psl2_frame_of_line(grid64):
    x = grid64.points
    fr = psl2_frame(line(grid64), 0.0)
    expected = np.stack([np.stack([np.ones(64), -x], -1), np.stack([np.zeros(64), np.ones(64)], -1)], -2)
    assert np.max(np.abs(fr.rho.values - expected)) < 1e-12
    assert max(normalization_residuals(fr, line(grid64)).values()) < 1e-12


def test_psl2_frame_of_line_lambda_one(grid64):
    x = grid64.points
    fr = psl2_frame(line(grid64), 1.0)
    expected = np.stack([np.stack([np.ones(64), -x], -1), np.stack([-np.ones(64), x + 1], -1)], -2)
    assert np.max(np.abs(fr.rho.values - expected)) < 1e-12
    assert np.max(np.abs(np.linalg.det(fr.rho.values) - 1)) < 1e-12


@pytest.mark.parametrize("lam", [0.0, 0.4, -1.3])
def test_sf_matrix_of_line(grid64, lam):
    sf = psl2_serret_frenet(psl2_frame(line(grid64), lam), line(grid64))
    assert np.allclose(sf.K.values, [[-lam, -1], [lam ** 2, lam]], atol=1e-12)


@given(a=st.floats(-0.3, 0.3), b=st.floats(-0.1, 0.1), lam=st.floats(-2, 2))
def test_psl2_normalizations_and_sf(a, b, lam):
    g = PeriodicGrid(128)
    u = ProjectiveCurve.from_function(g, lambda x: a * np.sin(x) + b * np.cos(3 * x))
    fr = psl2_frame(u, lam)
    assert max(normalization_residuals(fr, u).values()) < 1e-8
    assert psl2_serret_frenet(fr, u).residual < 1e-6


def test_inconsistent_frame_raises(grid64):
    u = ProjectiveCurve.from_function(grid64, lambda x: 0.2 * np.sin(x))
    fr = psl2_frame(line(grid64), 0.0)
    with pytest.raises(InconsistencyError):
        psl2_serret_frenet(fr, u)


def test_mobius_prolonged_composition(rng):
    u, u1, u2 = 0.3, 1.2, -0.4
    g, h = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    once = mobius_prolonged(g @ h, u, u1, u2)
    twice = mobius_prolonged(g, *mobius_prolonged(h, u, u1, u2))
    assert np.allclose(once, twice, rtol=1e-12)


def test_sf_matrix_trace_free():
    K = psl2_sf_matrix(np.linspace(-1, 1, 5), 0.7)
    assert np.max(np.abs(np.trace(K, axis1=1, axis2=2))) == 0.0


def test_euclidean_circle_block(grid64):
    c = EuclideanCurve.from_function(grid64, lambda t: np.stack([np.cos(t), np.sin(t), 0 * t], 1))
    sf = euclidean_serret_frenet(c)
    K = sf.K.values
    assert np.allclose(K[:, 2, 1], 1.0) and np.allclose(K[:, 1, 2], -1.0)
    assert np.allclose(K[:, 3, 2], 0.0, atol=1e-12)
    assert sf.residual < 1e-10
    assert np.allclose(euclidean_frame(c)[:, 0], [1, 0, 0, 0])


def test_euclidean_helix_constant_K(grid64):
    a, b = 1.0, 0.5
    c = EuclideanCurve.from_function(grid64, lambda t: np.stack([a * np.cos(t), a * np.sin(t), b * t], 1),
                                     drift=(0, 0, b))
    sf = euclidean_serret_frenet(reparametrize_arclength(c))
    K = sf.K.values
    assert np.allclose(K[:, 2, 1], a / (a * a + b * b), atol=1e-8)
    assert np.allclose(K[:, 3, 2], b / (a * a + b * b), atol=1e-8)
    assert sf.residual < 1e-6
