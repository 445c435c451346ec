"""
Verification suites: property checks against exact identities.

Every suite returns a JSON-ready report ``{"suite", "passed", "checks"}``
where each check records its residual, the tolerance and the comparison.
Tolerances live in :data:`TOLERANCES` and can be overridden per run with
``{"suite.check": value}``.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial.transform import Rotation

from .akns import (
    euclidean_frame_pair,
    gauge_transform,
    kdv_akns_pair,
    lambda_gauge,
    residual_report,
    zero_curvature_residual,
)
from .curves import (
    EuclideanCurve,
    LagrangianCurve,
    ProjectiveCurve,
    projective_to_star,
    reparametrize_arclength,
    star_to_projective,
)
from .errors import InvalidInputError
from .flows import (
    euclidean_jets,
    flow_spec,
    invariantization_oracle,
    relative_residual,
    run_flow,
)
from .frames import (
    euclidean_serret_frenet,
    normalization_residuals,
    psl2_frame,
    psl2_serret_frenet,
    psl2_sf_matrix,
)
from .hamiltonian import (
    CATALOG,
    Functional,
    euclid_P,
    hamiltonian_flow,
    poisson_catalog,
)
from .invariants import (
    EuclideanInvariants,
    centroaffine_curvature,
    curvature_torsion,
    hasimoto,
    lagrangian_schwarzian,
    schwarzian,
    schwarzian_window,
)
from .numerics import GridFunction, PeriodicGrid, rk4_step, spectral_derivative
from .operators import adjoint_residual

TOLERANCES = {
    "kdv-invariantization.residual": 1e-4,
    "kdv-invariantization.runtime": 30.0,
    "kdv-invariantization.lambda-independence": 1e-4,
    "general-h.residual": 1e-4,
    "sawada-kotera.residual": 1e-3,
    "hasimoto-nls.residual": 1e-2,
    "euclid-P.residual": 1e-3,
    "skewness.adjoint": 1e-9,
    "akns-kdv.residual": 1e-5,
    "akns-kdv.negative-control": 1e-1,
    "akns-kdv.order": 0.5,
    "akns-kdv.algebra": 1e-12,
    "akns-kdv.rejected-exponent": 1e-3,
    "frames.normalization": 1e-8,
    "frames.psl2-sf": 1e-6,
    "frames.gauge": 1e-14,
    "frames.euclidean-sf": 1e-6,
    "frames.euclidean-pair": 1e-5,
    "lagrangian-decoupled.offdiag": 1e-8,
    "lagrangian-decoupled.kdv": 1e-4,
    "conformal-cc.flow": 1e-6,
    "pinkall.det": 1e-6,
    "pinkall.dictionary": 1e-5,
    "invariance.rigid": 1e-8,
    "invariance.mobius": 1e-6,
}


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    comparison: str = "<"      # "<": value must stay below, ">": above, "==": exact
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.comparison == "<":
            return bool(self.value < self.tolerance)
        if self.comparison == ">":
            return bool(self.value > self.tolerance)
        return bool(self.value == self.tolerance)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


class _Tol:
    def __init__(self, suite, overrides):
        self.suite = suite
        self.table = dict(TOLERANCES)
        for key, val in (overrides or {}).items():
            if key not in self.table:
                raise InvalidInputError(f"unknown tolerance key {key!r}")
            self.table[key] = float(val)

    def __call__(self, check):
        return self.table[f"{self.suite}.{check}"]


# ---------------------------------------------------------------------------
# shared test curves

def sine_curve(n=256, amplitude=0.1) -> ProjectiveCurve:
    """``u = x + a sin x`` on ``[0, 2 pi)``."""
    return ProjectiveCurve.from_function(PeriodicGrid(n), lambda x: amplitude * np.sin(x))


def wavy_curve(n=128, amplitude=0.1) -> ProjectiveCurve:
    return ProjectiveCurve.from_function(
        PeriodicGrid(n), lambda x: amplitude * np.sin(x) + 0.5 * amplitude * np.cos(2 * x))


def saddle_curve(n=256) -> EuclideanCurve:
    """Closed saddle-shaped space curve with curvature bounded away from zero, arc-length."""
    c = EuclideanCurve.from_function(PeriodicGrid(n), lambda t: np.stack(
        [np.cos(t) + 0.05 * np.cos(2 * t), np.sin(t) - 0.03 * np.sin(3 * t),
         0.3 * np.cos(2 * t) + 0.1 * np.sin(t)], axis=1))
    return reparametrize_arclength(c)


def torus_knot_curve(n=256, R=1.5, r=0.3, m=3) -> EuclideanCurve:
    """Toroidal helix with a small vertical bump, arc-length."""
    c = EuclideanCurve.from_function(PeriodicGrid(n), lambda t: np.stack(
        [(R + r * np.cos(m * t)) * np.cos(t), (R + r * np.cos(m * t)) * np.sin(t),
         r * np.sin(m * t) + 0.05 * np.cos(2 * t)], axis=1))
    return reparametrize_arclength(c)


def _kt(c):
    inv = curvature_torsion(c)
    return [inv.kappa, inv.tau]


def _s(u):
    return schwarzian(u).s


# ---------------------------------------------------------------------------
# suites

def suite_kdv_invariantization(tol, rng):
    u = sine_curve(256, 0.1)
    L = u.grid.length
    dt = 1e-5
    t0 = time.perf_counter()
    r = invariantization_oracle(flow_spec("schwarzian-kdv"), u, _s, micro_dt=dt / 100)
    elapsed = time.perf_counter() - t0
    k = _s(u).values
    ref = spectral_derivative(k, L, 3) + 3 * k * spectral_derivative(k, L, 1)
    checks = [Check("residual", relative_residual(r.array(), ref), tol("residual"),
                    detail={"n": 256, "micro_dt": r.micro_dt, "error_bound": r.error_bound}),
              Check("runtime", elapsed, tol("runtime"), detail={"unit": "s"})]
    # translation part -3 lam^p S' removed, the rest must not depend on lam
    u2 = wavy_curve(128, 0.1)
    s2 = _s(u2).values
    s2x = spectral_derivative(s2, u2.grid.length, 1)
    base = None
    worst = 0.0
    for lam in (0.0, 0.5, 1.0):
        spec = flow_spec("schwarzian-kdv-lambda", lam=lam, exponent=2)
        val = invariantization_oracle(spec, u2, _s).array() + 3 * lam ** 2 * s2x
        if base is None:
            base = val
        else:
            worst = max(worst, relative_residual(val, base))
    checks.append(Check("lambda-independence", worst, tol("lambda-independence"),
                        detail={"lambdas": [0.0, 0.5, 1.0]}))
    return checks


def random_projective_h(rng):
    """Smooth nonlinear coefficient ``h(k, k', k'')`` with random weights."""
    a = rng.normal(size=6)

    def h(j):
        return (a[0] * j["k"] + a[1] * j["k"] ** 2 + a[2] * j["k1"] + a[3] * j["k2"]
                + a[4] * j["k"] * j["k1"] + a[5] * np.sin(j["k"]))
    h.__name__ = "random_h(" + ",".join(f"{v:.6g}" for v in a) + ")"
    return h


def suite_general_h(tol, rng):
    u = wavy_curve(128, 0.1)
    L = u.grid.length
    k = _s(u).values
    jets = {"k": k, "k1": spectral_derivative(k, L, 1), "k2": spectral_derivative(k, L, 2)}
    checks = []
    for i in range(3):
        h = random_projective_h(rng)
        hv = h(jets)
        ref = spectral_derivative(hv, L, 3) + 2 * k * spectral_derivative(hv, L, 1) + jets["k1"] * hv
        r = invariantization_oracle(flow_spec("projective-h", h=h), u, _s)
        checks.append(Check(f"residual[{i}]", relative_residual(r.array(), ref), tol("residual"),
                            detail={"h": h.__name__, "n": 128, "error_bound": r.error_bound}))
    return checks


def suite_sawada_kotera(tol, rng):
    u = wavy_curve(128, 0.1)
    L = u.grid.length
    k = _s(u).values
    d = [spectral_derivative(k, L, j) for j in range(6)]
    ref = 2 * d[5] + 5 * k * d[3] + 5 * d[1] * d[2] + 2.5 * d[1] * k ** 2
    dt = 1e-7
    r = invariantization_oracle(flow_spec("sawada-kotera-realization"), u, _s,
                                micro_dt=dt / 100, rel_tol=tol("residual"))
    return [Check("residual", relative_residual(r.array(), ref), tol("residual"),
                  detail={"n": 128, "micro_dt": r.micro_dt, "error_bound": r.error_bound})]


def nls_gauge_residuals(times, kappas, taus, grid):
    """Per-snapshot ``|i phi_t + phi'' + |phi|^2 phi / 2 - c phi| / |phi_t|`` with ``c`` fitted.

    ``phi_t`` uses the fourth-order central stencil, so the first and last
    two snapshots are skipped.  Returns ``(residuals, c)``.
    """
    L = grid.length
    times = np.asarray(times)
    phis, phixx = [], []
    for k, t in zip(kappas, taus):
        nat = hasimoto(EuclideanInvariants(GridFunction(grid, k), GridFunction(grid, t)))
        phi = nat.phi.values
        k1, k2 = spectral_derivative(k, L, 1), spectral_derivative(k, L, 2)
        t1 = spectral_derivative(t, L, 1)
        phis.append(phi)
        phixx.append((k2 + 2j * k1 * t + 1j * k * t1 - k * t ** 2) * phi / k)
    phis = np.array(phis)
    h = times[1] - times[0]
    res, cs = [], []
    for i in range(2, len(times) - 2):
        pt = (-phis[i + 2] + 8 * phis[i + 1] - 8 * phis[i - 1] + phis[i - 2]) / (12 * h)
        rest = 1j * pt + phixx[i] + 0.5 * np.abs(phis[i]) ** 2 * phis[i]
        c = float(np.real(np.vdot(phis[i], rest) / np.vdot(phis[i], phis[i])))
        res.append(float(np.linalg.norm(rest - c * phis[i]) / np.linalg.norm(pt)))
        cs.append(c)
    return np.array(res), np.array(cs)


def suite_hasimoto_nls(tol, rng):
    c = torus_knot_curve(256)
    run = run_flow(flow_spec("vortex-filament"), c, dt=2e-3, steps=40)
    res, cs = nls_gauge_residuals(run.times, run.history("kappa"), run.history("tau"), c.grid)
    return [Check("residual", float(res.max()), tol("residual"),
                  detail={"n": 256, "dt": 2e-3, "steps": 40, "status": run.status,
                          "c_range": [float(cs.min()), float(cs.max())]})]


def random_euclidean_gh(rng):
    """Pair ``g = a1 k + a2 k^3 + c t``, ``h = b1 t + b2 t^3 + c k``.

    The shared ``c`` makes ``k g' + t h'`` an exact derivative, so the pair
    is always in the range of the operator.
    """
    a, b, c = rng.normal(size=2), rng.normal(size=2), rng.normal()

    def g(j):
        return a[0] * j["k"] + a[1] * j["k"] ** 3 + c * j["t"]

    def h(j):
        return b[0] * j["t"] + b[1] * j["t"] ** 3 + c * j["k"]
    g.__name__ = f"g({a[0]:.6g},{a[1]:.6g},{c:.6g})"
    h.__name__ = f"h({b[0]:.6g},{b[1]:.6g},{c:.6g})"
    return g, h


def suite_euclid_P(tol, rng):
    c = saddle_curve(256)
    inv = curvature_torsion(c)
    P = euclid_P(inv.kappa, inv.tau)
    micro = 1e-8
    checks = []
    r = invariantization_oracle(flow_spec("vortex-filament"), c, _kt, micro_dt=micro)
    out = P([inv.kappa, GridFunction(c.grid, np.zeros(c.grid.n))])
    for comp, name in enumerate(("kappa", "tau")):
        checks.append(Check(f"vortex-filament.{name}", relative_residual(r.array()[comp], out[comp].values),
                            tol("residual"), detail={"error_bound": r.error_bound}))
    jets = euclidean_jets(c)
    for i in range(2):
        g, h = random_euclidean_gh(rng)
        out = P([GridFunction(c.grid, g(jets)), GridFunction(c.grid, h(jets))])
        r = invariantization_oracle(flow_spec("euclidean-hg", g=g, h=h), c, _kt, micro_dt=micro)
        for comp, name in enumerate(("kappa", "tau")):
            checks.append(Check(f"random[{i}].{name}",
                                relative_residual(r.array()[comp], out[comp].values), tol("residual"),
                                detail={"g": g.__name__, "h": h.__name__, "error_bound": r.error_bound}))
    return checks


def _random_field(rng, grid, offset=0.0):
    x = grid.points
    v = (0.3 * np.cos(x + rng.normal()) + 0.2 * np.sin(2 * x + rng.normal())
         + 0.1 * np.cos(3 * x + rng.normal()))
    return GridFunction(grid, v + offset)


def suite_skewness(tol, rng):
    grid = PeriodicGrid(128)
    fields = {"k": _random_field(rng, grid), "kappa": _random_field(rng, grid, 1.5),
              "tau": _random_field(rng, grid), "k1": _random_field(rng, grid),
              "k2": _random_field(rng, grid),
              "s_d": [_random_field(rng, grid), _random_field(rng, grid)]}
    seed = int(rng.integers(2 ** 31))
    return [Check(name, adjoint_residual(poisson_catalog(name, **fields), rng=seed), tol("adjoint"))
            for name in CATALOG]


def suite_akns_kdv(tol, rng):
    u = wavy_curve(128, 0.1)
    exponent = 2
    checks = []
    for lam in (0.0, 0.3, 0.7):
        spec = flow_spec("schwarzian-kdv-lambda", lam=lam, exponent=exponent)
        run = run_flow(spec, u, dt=1e-4, steps=16)
        pair = kdv_akns_pair(run, lam)
        checks.append(Check(f"residual[lam={lam}]", zero_curvature_residual(pair), tol("residual"),
                            detail={"n": 128, "dt": 1e-4, "steps": 16, "exponent": exponent}))
        checks.append(Check(f"negative-control[lam={lam}]", zero_curvature_residual(pair.with_B(-pair.B)),
                            tol("negative-control"), ">"))
        checks.append(Check(f"algebra[lam={lam}]", pair.algebra_defect(), tol("algebra")))
        if lam > 0:
            # the cubic tangential term is not compatible with this pair
            bad = run_flow(flow_spec("schwarzian-kdv-lambda", lam=lam, exponent=3), u, dt=1e-4, steps=16)
            checks.append(Check(f"rejected-exponent-3[lam={lam}]",
                                zero_curvature_residual(kdv_akns_pair(bad, lam)),
                                tol("rejected-exponent"), ">"))
    # convergence study on a coarser grid, where the roundoff floor sits well
    # below the time-stencil error; the observed order climbs towards 4
    spec = flow_spec("schwarzian-kdv-lambda", lam=0.7, exponent=exponent)
    coarse = wavy_curve(64, 0.1)
    study = {}
    for spacing in (1e-3, 5e-4, 2e-4):
        rep = residual_report(kdv_akns_pair(run_flow(spec, coarse, dt=spacing, steps=16), 0.7))
        study[spacing] = rep.as_dict()
    checks.append(Check("order", abs(study[2e-4]["stencil_order_estimate"] - 4.0), tol("order"),
                        detail={"n": 64, "study": [dict(spacing=k, **v) for k, v in study.items()]}))
    return checks


def suite_frames(tol, rng):
    u = ProjectiveCurve.from_function(PeriodicGrid(128),
                                      lambda x: 0.2 * np.sin(x) + 0.05 * np.cos(3 * x))
    checks = []
    s = _s(u).values
    for lam in (0.0, 0.7):
        fr = psl2_frame(u, lam)
        norm = normalization_residuals(fr, u)
        checks.append(Check(f"normalization[lam={lam}]", max(norm.values()), tol("normalization"),
                            detail=norm))
        checks.append(Check(f"psl2-sf[lam={lam}]", psl2_serret_frenet(fr, u).residual, tol("psl2-sf")))
        if lam:
            K = gauge_transform(psl2_sf_matrix(s, lam), lambda_gauge(lam))
            diag = float(np.max(np.abs(K[:, 0, 0])) + np.max(np.abs(K[:, 1, 1])))
            checks.append(Check(f"gauge-diagonal[lam={lam}]", diag, 0.0, "=="))
            checks.append(Check(f"gauge[lam={lam}]", float(np.max(np.abs(K - psl2_sf_matrix(s, 0.0)))),
                                tol("gauge")))
    c = saddle_curve(256)
    checks.append(Check("euclidean-sf", euclidean_serret_frenet(c).residual, tol("euclidean-sf")))
    run = run_flow(flow_spec("vortex-filament"), torus_knot_curve(256), dt=2e-4, steps=12)
    checks.append(Check("euclidean-pair[lam=0]", zero_curvature_residual(euclidean_frame_pair(run, 0.0)),
                        tol("euclidean-pair")))
    return checks


def suite_lagrangian_decoupled(tol, rng):
    grid = PeriodicGrid(128)
    parts = [lambda x: 0.1 * np.sin(x), lambda x: 0.08 * np.cos(2 * x) + 0.05 * np.sin(x)]
    c0 = LagrangianCurve.diagonal(grid, parts)
    dt, steps = 1e-4, 20
    run = run_flow(flow_spec("lagrangian-skdv"), c0, dt=dt, steps=steps)
    off = float(run.history("offdiag").max())
    sd = run.history("s_d")                      # (T, n, m)
    times = np.asarray(run.times)
    L = grid.length
    st = (-sd[4:] + 8 * sd[3:-1] - 8 * sd[1:-3] + sd[:-4]) / (12 * dt)
    worst = 0.0
    for i, s in enumerate(sd[2:-2]):
        for comp in range(s.shape[1]):
            k = s[:, comp]
            ref = spectral_derivative(k, L, 3) + 3 * k * spectral_derivative(k, L, 1)
            worst = max(worst, relative_residual(st[i][:, comp], ref))
    return [Check("offdiag", off, tol("offdiag"), detail={"status": run.status}),
            Check("kdv", worst, tol("kdv"), detail={"n": 128, "dt": dt, "steps": steps,
                                                    "snapshots": len(times)})]


def conformal_expanded_rate(state, length):
    """Hand expansion of the conformal-cc flow for ``h = int (k1^2 + k2^2) / 2``.

    ``k1_t = -k1'''/2 + 3 k1 k1' + 3 k2 k2'``, ``k2_t = k2'''/2 + k1' k2 - k1 k2'``.
    """
    a, b = state
    d = lambda f, j: spectral_derivative(f, length, j)  # noqa: E731
    a1, b1 = d(a, 1), d(b, 1)
    return np.stack([-0.5 * d(a, 3) + 3 * a * a1 + 3 * b * b1,
                     0.5 * d(b, 3) + a1 * b - a * b1])


def suite_conformal_cc(tol, rng):
    grid = PeriodicGrid(64)
    k1 = _random_field(rng, grid)
    zero = GridFunction(grid, np.zeros(grid.n))
    cc = poisson_catalog("conformal-cc", k1=k1, k2=zero)
    rp = poisson_catalog("rp1-reduced", k=k1)
    h1 = _random_field(rng, grid)
    same = cc.entry(0, 0).same_chains(rp)
    applied = cc.apply([h1, zero])[0].values
    exact = bool(same and np.array_equal(applied, rp.apply(h1).values))
    checks = [Check("chain-equality", float(exact), 1.0, "==",
                    detail={"same_chains": bool(same)})]
    H = Functional(lambda a, b: 0.5 * (a ** 2 + b ** 2), order=0, components=2, label="(k1^2+k2^2)/2")
    k0 = [GridFunction(grid, 0.1 * k1.values), GridFunction(grid, 0.1 * _random_field(rng, grid).values)]
    dt, steps = 1e-4, 50
    hist = hamiltonian_flow("conformal-cc", H, k0, dt, steps, stride=steps)
    state = np.stack([f.values for f in k0])
    for _ in range(steps):
        state = rk4_step(state, lambda s: conformal_expanded_rate(s, grid.length), dt)
    got = hist.array()[-1]
    checks.append(Check("flow", relative_residual(got, state), tol("flow"),
                        detail={"n": 64, "dt": dt, "steps": steps, "status": hist.status}))
    return checks


def suite_pinkall(tol, rng):
    u = wavy_curve(128, 0.1)
    gamma = projective_to_star(u)
    dt, steps, stride = 1e-4, 50, 5
    run = run_flow(flow_spec("pinkall-star"), gamma, dt=dt, steps=steps, stride=stride)
    det = max(float(np.max(np.abs(d - 1.0))) for d in run.history("det"))
    dictionary = 0.0
    for g in run.snapshots:
        p = centroaffine_curvature(g).p.values
        s = _s(star_to_projective(g)).values
        dictionary = max(dictionary, float(np.max(np.abs(p + 0.5 * s))))
    ref = run_flow(flow_spec("schwarzian-kdv"), u, dt=dt, steps=steps, stride=stride)
    along = max(relative_residual(p, -0.5 * s)
                for p, s in zip(run.history("p"), ref.history("S")))
    return [Check("det", det, tol("det"), detail={"status": run.status}),
            Check("dictionary", dictionary, tol("dictionary")),
            Check("dictionary-vs-kdv-run", along, tol("dictionary"))]


def random_rigid_motion(rng):
    return Rotation.random(random_state=rng).as_matrix(), rng.normal(size=3)


def random_mobius(rng, u_range):
    """Unimodular ``g`` acting as ``alpha / (u - pole) + beta`` with the pole kept off ``u_range``.

    The pole lies 1 to 3 units outside the range, so the image stays
    resolvable on the sampling window.
    """
    lo, hi = u_range
    dist = rng.uniform(1.0, 3.0)
    pole = hi + dist if rng.random() < 0.5 else lo - dist
    alpha = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
    beta = rng.normal()
    g = np.array([[beta, alpha - beta * pole], [1.0, -pole]])
    return g / np.sqrt(abs(np.linalg.det(g)))


def suite_invariance(tol, rng):
    c = saddle_curve(256)
    inv = curvature_torsion(c)
    worst = 0.0
    for _ in range(3):
        Q, b = random_rigid_motion(rng)
        moved = EuclideanCurve(c.grid, c.points @ Q.T + b, Q @ c.drift)
        inv2 = curvature_torsion(moved)
        worst = max(worst, float(np.max(np.abs(inv2.kappa.values - inv.kappa.values))),
                    float(np.max(np.abs(inv2.tau.values - inv.tau.values))))
    checks = [Check("rigid", worst, tol("rigid"))]
    # non-periodic image: windowed finite differences, compared on the nodes
    # that get centred stencils (one-sided third derivatives are noisier)
    x = np.linspace(0.5, 1.5, 61)
    u = x + 0.1 * np.sin(x)
    s = schwarzian_window(x, u)
    inner = slice(6, -6)
    worst = 0.0
    for _ in range(5):
        g = random_mobius(rng, (u.min(), u.max()))
        gu = (g[0, 0] * u + g[0, 1]) / (g[1, 0] * u + g[1, 1])
        worst = max(worst, float(np.max(np.abs(schwarzian_window(x, gu) - s)[inner])))
    checks.append(Check("mobius", worst, tol("mobius"),
                        detail={"window": [0.5, 1.5], "points": 61, "centred_nodes": 49}))
    return checks


SUITES: dict[str, Callable] = {
    "kdv-invariantization": suite_kdv_invariantization,
    "general-h": suite_general_h,
    "sawada-kotera": suite_sawada_kotera,
    "hasimoto-nls": suite_hasimoto_nls,
    "euclid-P": suite_euclid_P,
    "akns-kdv": suite_akns_kdv,
    "lagrangian-decoupled": suite_lagrangian_decoupled,
    "conformal-cc": suite_conformal_cc,
    "pinkall": suite_pinkall,
    "frames": suite_frames,
    "skewness": suite_skewness,
    "invariance": suite_invariance,
}


def run_suite(name: str, tolerances: dict | None = None, seed: int = 0) -> dict:
    """Run one suite and return its JSON report."""
    if name not in SUITES:
        raise InvalidInputError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    tol = _Tol(name, {k: v for k, v in (tolerances or {}).items() if k.startswith(name + ".")})
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    checks = SUITES[name](tol, rng)
    return {"suite": name, "seed": seed, "passed": all(c.passed for c in checks),
            "elapsed_s": round(time.perf_counter() - t0, 3),
            "checks": [c.as_dict() for c in checks]}


__all__ = ["SUITES", "TOLERANCES", "Check", "conformal_expanded_rate", "nls_gauge_residuals",
           "run_suite", "saddle_curve", "sine_curve", "torus_knot_curve", "wavy_curve"]
