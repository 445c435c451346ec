import numpy as np
import pytest
import sympy as sp

from geomflow.curves import EuclideanCurve, LagrangianCurve, ProjectiveCurve
from geomflow.errors import InvalidInputError, OracleUnreliableError
from geomflow.flows import (
    FLOWS,
    default_dt,
    flow_spec,
    flow_vector_field,
    invariantization_oracle,
    leading_term,
    relative_residual,
    run_flow,
)
from geomflow.invariants import curvature_torsion, schwarzian
from geomflow.numerics import PeriodicGrid, spectral_derivative
from geomflow.verification import saddle_curve, sine_curve


def circle(grid, r=2.0):
    return EuclideanCurve.from_function(grid, lambda t: np.stack([r * np.cos(t), r * np.sin(t), 0 * t], 1))


def test_flow_spec_rejects_unknown_name():
    with pytest.raises(InvalidInputError, match="unknown flow"):
        flow_spec("heat")


def test_flow_spec_rejects_unknown_param():
    with pytest.raises(InvalidInputError, match="does not take"):
        flow_spec("schwarzian-kdv", lam=1.0)


def test_flow_spec_rejects_unknown_coefficient():
    with pytest.raises(InvalidInputError):
        flow_spec("projective-h", h="nonsense")


def test_flow_on_wrong_geometry(grid64):
    with pytest.raises(InvalidInputError, match="acts on projective"):
        flow_vector_field(flow_spec("schwarzian-kdv"), circle(grid64))


def test_every_flow_has_a_leading_term():
    for name, d in FLOWS.items():
        assert d.order in (2, 3, 4, 5)


def test_leading_term_schwarzian_kdv():
    assert leading_term(flow_spec("schwarzian-kdv"), sine_curve(64)) == (3, pytest.approx(1.0))


def test_line_is_fixed_point(grid64):
    u = ProjectiveCurve(grid64, np.zeros(64), 1.0)
    assert np.max(np.abs(flow_vector_field(flow_spec("schwarzian-kdv"), u))) < 1e-14


def test_kdv_realization_matches_sympy_oracle():
    # S_t = S''' + 3 S S' for u_t = u' S(u); checked at node 16 of n = 64
    x = sp.symbols("x")
    u = x + sp.Rational(1, 10) * sp.sin(x)
    S = sp.diff(u, x, 3) / sp.diff(u, x) - sp.Rational(3, 2) * (sp.diff(u, x, 2) / sp.diff(u, x)) ** 2
    rate = sp.diff(S, x, 3) + 3 * S * sp.diff(S, x)
    c = sine_curve(64)
    exact = float(rate.subs(x, c.grid.points[16]))
    assert exact == pytest.approx(-0.077725, abs=1e-15)
    res = invariantization_oracle(flow_spec("schwarzian-kdv"), c, lambda cc: schwarzian(cc).s)
    assert res.array()[16] == pytest.approx(exact, abs=1e-6)
    assert res.error_bound < 1e-6


def test_oracle_unreliable_with_coarse_step():
    with pytest.raises(OracleUnreliableError):
        invariantization_oracle(flow_spec("schwarzian-kdv"), sine_curve(64),
                                lambda cc: schwarzian(cc).s, micro_dt=0.3, rel_tol=1e-12)


def test_oracle_zero_field_flow():
    spec = flow_spec("euclidean-hg", h="zero", g="zero")
    res = invariantization_oracle(spec, saddle_curve(64),
                                  lambda c: [curvature_torsion(c).kappa, curvature_torsion(c).tau])
    # roundoff floor of the stencil: eps * |kappa| / micro_dt
    assert np.max(np.abs(res.array())) < 1e-8


def test_vortex_filament_circle_translates(grid64):
    r = 2.0
    run = run_flow(flow_spec("vortex-filament"), reparametrize(circle(grid64, r)), dt=1e-3, steps=50, stride=50)
    assert run.status == "ok"
    shift = run.final.points - run.initial.points
    assert np.max(np.abs(shift[:, :2])) < 1e-8
    assert np.max(np.abs(shift[:, 2] - 0.05 / r)) < 1e-8


def reparametrize(c):
    from geomflow.curves import reparametrize_arclength
    return reparametrize_arclength(c)


def test_kdv_conserves_mass():
    u0 = sine_curve(128)
    run = run_flow(flow_spec("schwarzian-kdv"), u0, dt=2e-3, steps=20, stride=10)
    assert run.status == "ok"
    S = run.history("S")
    assert abs(S[-1].mean() - S[0].mean()) < 1e-10


def test_lagrangian_diagonal_stays_diagonal(grid64):
    x = grid64.points
    c = LagrangianCurve.diagonal(grid64, [0.1 * np.sin(x), 0.05 * np.cos(2 * x)])
    run = run_flow(flow_spec("lagrangian-skdv"), c, dt=1e-3, steps=10, stride=5)
    assert run.status == "ok"
    assert np.max(run.history("offdiag")) < 1e-12


def test_lagrangian_diagonal_matches_scalar(grid64):
    x = grid64.points
    pa = 0.1 * np.sin(x)
    c = LagrangianCurve.diagonal(grid64, [pa, pa])
    u = ProjectiveCurve(grid64, pa, 1.0)
    vl = flow_vector_field(flow_spec("lagrangian-skdv"), c)
    vs = flow_vector_field(flow_spec("schwarzian-kdv"), u)
    assert np.max(np.abs(vl[:, 0, 0] - vs)) < 1e-12


def test_substepping_below_stability_limit():
    u0 = sine_curve(128)
    spec = flow_spec("schwarzian-kdv")
    dt = 10 * default_dt(spec, u0)
    run = run_flow(spec, u0, dt=dt, steps=2)
    assert run.substeps >= 10 and run.status == "ok"


def test_blow_up_status():
    run = run_flow(flow_spec("schwarzian-kdv"), sine_curve(64), dt=1e-2, steps=50, allow_unstable=True)
    assert run.status in ("blow-up", "degenerate")
    assert run.steps_completed < 50
    assert np.all(np.isfinite(run.final.values))


def test_invalid_run_arguments():
    with pytest.raises(InvalidInputError):
        run_flow(flow_spec("schwarzian-kdv"), sine_curve(64), dt=0.0, steps=1)


def test_summary_fields():
    run = run_flow(flow_spec("schwarzian-kdv"), sine_curve(64), dt=1e-4, steps=4, stride=2)
    s = run.summary()
    assert s["status"] == "ok" and s["snapshots"] == 3 and "S_max_change" in s


def test_relative_residual_basic():
    assert relative_residual([1.0, 2.0], [1.0, 2.0]) == 0
    assert relative_residual([1.0, 3.0], [1.0, 2.0]) == pytest.approx(0.5)
    assert relative_residual([1e-3], [0.0]) == pytest.approx(1e-3)


def test_projective_h_reduces_to_schwarzian():
    u = sine_curve(64)
    a = flow_vector_field(flow_spec("projective-h", h="schwarzian"), u)
    b = flow_vector_field(flow_spec("schwarzian-kdv"), u)
    assert np.array_equal(a, b)


def test_lambda_flow_time_scale():
    # at lam = 0 the lambda flow is the Schwarzian flow at time scale -1/2
    u = sine_curve(64)
    a = flow_vector_field(flow_spec("schwarzian-kdv-lambda", lam=0.0), u)
    b = flow_vector_field(flow_spec("schwarzian-kdv"), u)
    assert np.max(np.abs(a + 0.5 * b)) < 1e-14


def test_euclidean_hg_keeps_arclength():
    spec = flow_spec("euclidean-hg", h="half-kappa-squared", g="kappa")
    run = run_flow(spec, saddle_curve(128), dt=2e-4, steps=4, stride=2)
    assert run.status == "ok"
    assert max(run.drift) < 1e-6
    assert np.max(np.abs(run.final.speed() - 1)) < 1e-7
