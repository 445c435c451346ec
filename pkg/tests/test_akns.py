import numpy as np
import pytest

from geomflow.akns import (
    constant_pair,
    gauge_pair,
    gauge_transform,
    kdv_akns_pair,
    kdv_q,
    lambda_gauge,
    n_matrix_consistency,
    residual_report,
    zero_curvature_residual,
)
from geomflow.curves import ProjectiveCurve
from geomflow.errors import InvalidInputError, PreconditionError, SingularOperatorError
from geomflow.flows import flow_spec, run_flow
from geomflow.frames import psl2_frame, psl2_serret_frenet
from geomflow.numerics import PeriodicGrid
from geomflow.verification import sine_curve, wavy_curve


@pytest.fixture(scope="module")
def lambda_run():
    return {lam: run_flow(flow_spec("schwarzian-kdv-lambda", lam=lam, exponent=2), wavy_curve(128),
                          dt=1e-4, steps=16)
            for lam in (0.0, 0.5)}


def test_commuting_constant_pair(grid64):
    A = np.array([[0.3, 1.0], [0.0, -0.3]])
    pair = constant_pair(A, 2 * A, np.arange(6) * 0.1, grid64)
    assert zero_curvature_residual(pair) < 1e-14


def test_line_is_stationary(grid64):
    u = ProjectiveCurve(grid64, np.zeros(64), 1.0)
    pair = kdv_akns_pair((np.arange(5) * 0.01, [u] * 5), 0.7)
    assert zero_curvature_residual(pair) < 1e-12


@pytest.mark.parametrize("lam", [0.0, 0.5])
def test_zero_curvature_on_flow(lambda_run, lam):
    pair = kdv_akns_pair(lambda_run[lam], lam)
    assert pair.algebra_defect() < 1e-12
    assert zero_curvature_residual(pair) < 1e-5


def test_negative_control(lambda_run):
    pair = kdv_akns_pair(lambda_run[0.5], 0.5)
    assert zero_curvature_residual(pair.with_B(-pair.B)) > 1e-1


def test_residual_report_fields(lambda_run):
    rep = residual_report(kdv_akns_pair(lambda_run[0.5], 0.5))
    assert rep.as_dict()["lambda"] == 0.5 and np.isfinite(rep.stencil_order_estimate)


def test_A_is_the_serret_frenet_matrix():
    u = wavy_curve(128)
    lam = 0.5
    A = kdv_akns_pair(([0.0], [u]), lam).A[0]
    K = psl2_serret_frenet(psl2_frame(u, lam), u).K.values
    assert np.max(np.abs(A - K)) < 1e-10


def test_conventions_differ_by_sign():
    s = np.linspace(-1, 1, 5)
    assert np.array_equal(kdv_q(s, 0.3, "printed"), -kdv_q(s, 0.3, "consistent"))
    with pytest.raises(InvalidInputError):
        kdv_q(s, 0.3, "other")


def test_n_matrix_consistency_prefers_consistent_convention():
    out = n_matrix_consistency(sine_curve(64), 0.4)
    assert out["consistent"] < 1e-10 < out["printed"]


def test_identity_gauge_is_trivial(lambda_run):
    pair = kdv_akns_pair(lambda_run[0.5], 0.5)
    same = gauge_pair(pair, np.eye(2))
    assert np.array_equal(same.A, pair.A) and np.array_equal(same.B, pair.B)


def test_lambda_gauge_preserves_residual(lambda_run):
    pair = kdv_akns_pair(lambda_run[0.5], 0.5)
    moved = gauge_pair(pair, lambda_gauge(0.5))
    assert zero_curvature_residual(moved) < 1e-5
    assert np.max(np.abs(moved.A[..., 0, 0])) < 1e-14


def test_singular_gauge(grid64):
    with pytest.raises(SingularOperatorError):
        gauge_transform(np.zeros((64, 2, 2)), np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_x_dependent_identity_gauge(grid64):
    K = np.random.default_rng(0).normal(size=(64, 2, 2))
    g = np.broadcast_to(np.eye(2), (64, 2, 2)).copy()
    assert np.max(np.abs(gauge_transform(K, g, length=grid64.length) - K)) < 1e-14
    with pytest.raises(InvalidInputError):
        gauge_transform(K, g)


def test_too_few_snapshots(grid64):
    pair = constant_pair(np.eye(2), np.eye(2), [0.0, 0.1, 0.2], grid64)
    with pytest.raises(PreconditionError, match="at least 5"):
        zero_curvature_residual(pair)


def test_uneven_snapshots(grid64):
    pair = constant_pair(np.eye(2), np.eye(2), [0.0, 0.1, 0.2, 0.35, 0.4], grid64)
    with pytest.raises(PreconditionError, match="equally spaced"):
        zero_curvature_residual(pair)


def test_kdv_pair_needs_projective_history():
    with pytest.raises(InvalidInputError):
        kdv_akns_pair(([0.0], [np.zeros(4)]), 0.0)
