"""
Invariant curve flows, their method-of-lines integration and the
invariantization oracle.

A flow is selected by name from :data:`FLOWS` and parametrized by
coefficient functionals.  Coefficients are either names from
:data:`PROJECTIVE_COEFFICIENTS` / :data:`EUCLIDEAN_COEFFICIENTS` or callables
receiving a dict of invariant jets:

* projective: ``k = S(u)`` and ``k1, k2, k3`` (x-derivatives);
* Euclidean: ``k, k1, k2`` (curvature) and ``t, t1, t2`` (torsion),
  derivatives taken with respect to arc length.

    >>> spec = flow_spec("projective-h", h=lambda j: j["k"] ** 2 + j["k2"])
    >>> run = run_flow(spec, u0, dt=1e-5, steps=100, stride=10)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .curves import (
    EuclideanCurve,
    LagrangianCurve,
    ProjectiveCurve,
    StarCurve,
    reparametrize_arclength,
    star_to_projective,
)
from .errors import (
    BlowUpError,
    DegenerateCurveError,
    GeomflowError,
    InvalidInputError,
    OracleUnreliableError,
    PreconditionError,
)
from .frames import frenet_frame
from .invariants import (
    centroaffine_curvature,
    curvature_torsion,
    lagrangian_schwarzian,
    schwarzian,
)
from .numerics import GridFunction, rk4_integrate, rk4_step, spectral_derivative, stable_dt

DEFAULT_MICRO_DT = 1e-7
ORACLE_REL_TOL = 1e-5


# ---------------------------------------------------------------------------
# coefficient functionals

PROJECTIVE_COEFFICIENTS: dict[str, Callable] = {
    "zero": lambda j: np.zeros_like(j["k"]),
    "schwarzian": lambda j: j["k"],
    "sawada-kotera": lambda j: 2.0 * j["k2"] + 0.5 * j["k"] ** 2,
    "kdv-second": lambda j: j["k2"] + 1.5 * j["k"] ** 2,
}

EUCLIDEAN_COEFFICIENTS: dict[str, Callable] = {
    "zero": lambda j: np.zeros_like(j["k"]),
    "kappa": lambda j: j["k"],
    "tau": lambda j: j["t"],
    "kappa-tau": lambda j: j["k"] * j["t"],
    "half-kappa-squared": lambda j: 0.5 * j["k"] ** 2,
}


def _coefficient(value, table, what):
    if callable(value):
        return value
    try:
        return table[value]
    except KeyError:
        raise InvalidInputError(f"unknown {what} coefficient {value!r}; "
                                f"known: {sorted(table)}") from None


def projective_jets(u) -> dict:
    k = schwarzian(u).s.values
    L = u.grid.length
    return {"k": k, "k1": spectral_derivative(k, L, 1),
            "k2": spectral_derivative(k, L, 2), "k3": spectral_derivative(k, L, 3)}


def euclidean_jets(c) -> dict:
    """Curvature, torsion and their first two arc-length derivatives."""
    inv = curvature_torsion(c)
    speed = c.speed()
    L = c.grid.length

    def ds(f):
        return spectral_derivative(f, L, 1) / speed

    k, t = inv.kappa.values, inv.tau.values
    k1, t1 = ds(k), ds(t)
    return {"k": k, "k1": k1, "k2": ds(k1), "t": t, "t1": t1, "t2": ds(t1)}


# ---------------------------------------------------------------------------
# vector fields (time derivative of the curve samples)

def _vf_vortex(c, p):
    fr = frenet_frame(c)
    kappa = curvature_torsion(c).kappa.values
    return kappa[:, None] * fr.B


def _vf_euclidean_hg(c, p):
    fr = frenet_frame(c)
    jets = euclidean_jets(c)
    h = _coefficient(p["h"], EUCLIDEAN_COEFFICIENTS, "h")(jets)
    g = _coefficient(p["g"], EUCLIDEAN_COEFFICIENTS, "g")(jets)
    h_s = spectral_derivative(h, c.grid.length, 1) / c.speed()
    return h[:, None] * fr.T + (h_s / jets["k"])[:, None] * fr.N + g[:, None] * fr.B


def _vf_projective(h_fn):
    def vf(u, p):
        return u.derivative(1) * h_fn(u, p)
    return vf


def _h_schwarzian(u, p):
    return schwarzian(u).s.values


def _h_lambda(u, p):
    s = schwarzian(u).s.values
    return -0.5 * s - 3.0 * p["lam"] ** p["exponent"]


def _h_sawada(u, p):
    j = projective_jets(u)
    return 2.0 * j["k2"] + 0.5 * j["k"] ** 2


def _h_general(u, p):
    return _coefficient(p["h"], PROJECTIVE_COEFFICIENTS, "h")(projective_jets(u))


def _vf_lagrangian(c, p):
    u1, u2, u3 = c.derivative(1), c.derivative(2), c.derivative(3)
    return u3 - 1.5 * u2 @ np.linalg.solve(u1, u2)


def _vf_pinkall(gamma, p):
    # push-forward of u_t = u' S(u) through gamma = u'^(-1/2) (1, u):
    # gamma_t = S gamma' - 1/2 S' gamma
    s = schwarzian(star_to_projective(gamma)).s.values
    s1 = spectral_derivative(s, gamma.grid.length, 1)
    return s[:, None] * gamma.derivative(1) - 0.5 * s1[:, None] * gamma.points


@dataclass(frozen=True)
class _FlowDef:
    geometry: str
    order: int
    coefficient: float
    defaults: Mapping
    field: Callable
    invariants: str


FLOWS: dict[str, _FlowDef] = {
    "vortex-filament": _FlowDef("euclidean", 2, 1.0, {}, _vf_vortex, "u_t = kappa B"),
    "euclidean-hg": _FlowDef("euclidean", 4, 1.0, {"h": "zero", "g": "kappa"}, _vf_euclidean_hg,
                             "u_t = h T + (h_s / kappa) N + g B"),
    "schwarzian-kdv": _FlowDef("projective", 3, 1.0, {}, _vf_projective(_h_schwarzian),
                               "u_t = u' S(u)"),
    "schwarzian-kdv-lambda": _FlowDef("projective", 3, 0.5, {"lam": 0.0, "exponent": 3},
                                      _vf_projective(_h_lambda),
                                      "u_t = u' (-S(u)/2 - 3 lam^exponent)"),
    "sawada-kotera-realization": _FlowDef("projective", 5, 2.0, {}, _vf_projective(_h_sawada),
                                          "u_t = u' (2 S(u)'' + S(u)^2 / 2)"),
    "projective-h": _FlowDef("projective", 5, 2.0, {"h": "schwarzian"}, _vf_projective(_h_general),
                             "u_t = u' h(k, k', k''), k = S(u)"),
    "lagrangian-skdv": _FlowDef("lagrangian", 3, 1.0, {}, _vf_lagrangian,
                                "u_t = u3 - 3/2 u2 u1^-1 u2"),
    "pinkall-star": _FlowDef("star", 3, 1.0, {}, _vf_pinkall,
                             "gamma_t = S gamma' - S' gamma / 2 (push-forward of u_t = u' S(u))"),
}

_CURVE_TYPES = {"euclidean": EuclideanCurve, "projective": ProjectiveCurve,
                "star": StarCurve, "lagrangian": LagrangianCurve}


@dataclass(frozen=True)
class FlowSpec:
    name: str
    params: Mapping = field(default_factory=dict)

    @property
    def definition(self) -> _FlowDef:
        return FLOWS[self.name]

    @property
    def geometry(self) -> str:
        return FLOWS[self.name].geometry

    def describe(self) -> dict:
        """JSON-ready description; callables are recorded by name only."""
        params = {k: (getattr(v, "__name__", "callable") if callable(v) else v)
                  for k, v in self.params.items()}
        return {"flow": self.name, "params": params, "equation": self.definition.invariants}


def flow_spec(name: str, **params) -> FlowSpec:
    if name not in FLOWS:
        raise InvalidInputError(f"unknown flow {name!r}; known: {sorted(FLOWS)}")
    d = FLOWS[name]
    unknown = set(params) - set(d.defaults)
    if unknown:
        raise InvalidInputError(f"flow {name!r} does not take parameter(s) {sorted(unknown)}")
    merged = dict(d.defaults)
    merged.update(params)
    for key in ("h", "g"):
        if key in merged:
            table = PROJECTIVE_COEFFICIENTS if d.geometry == "projective" else EUCLIDEAN_COEFFICIENTS
            _coefficient(merged[key], table, key)
    return FlowSpec(name, merged)


def _check_geometry(spec: FlowSpec, c):
    want = spec.geometry
    if getattr(c, "geometry", None) != want:
        raise InvalidInputError(f"flow {spec.name!r} acts on {want} curves, got {type(c).__name__}")


def flow_vector_field(spec: FlowSpec, c) -> np.ndarray:
    """``du/dt`` at every node, same shape as the curve samples."""
    _check_geometry(spec, c)
    return spec.definition.field(c, spec.params)


# ---------------------------------------------------------------------------
# periodic state <-> curve

def curve_state(c) -> np.ndarray:
    if c.geometry == "star":
        return c.periodic_state
    return np.array(c.periodic_part)


def curve_from_state(template, state, strict=None):
    strict = template.strict if strict is None else strict
    if template.geometry == "star":
        return StarCurve.from_periodic_state(template.grid, state, template.monodromy_shift, strict)
    if template.geometry == "euclidean":
        return EuclideanCurve(template.grid, state + template.grid.points[:, None] * template.drift,
                              template.drift, strict)
    if template.geometry == "projective":
        return ProjectiveCurve(template.grid, state, template.slope, strict)
    return LagrangianCurve(template.grid, state, template.slope, strict)


def _state_rate(spec, c):
    v = flow_vector_field(spec, c)
    if c.geometry == "star":
        lin = c.monodromy_shift / c.grid.length
        return np.stack([v[:, 0], v[:, 1] - c.grid.points * lin * v[:, 0]], axis=1)
    return v


class _SplitCurve:
    """Curve ``base + w`` whose derivatives are ``D^j base`` (cached) plus ``D^j w``.

    Differentiating the small perturbation separately keeps roundoff of
    the large base curve out of finite differences in time.
    """

    def __init__(self, base, base_jets, w):
        self._base = base
        self._jets = base_jets
        self._w = w
        self._full = curve_from_state(base, curve_state(base) + w)
        self._wcurve = curve_from_state(base, w, strict=False)
        self._zero = curve_from_state(base, np.zeros_like(w), strict=False)

    def derivative(self, order=1):
        if order not in self._jets:
            self._jets[order] = self._base.derivative(order)
        dw = self._wcurve.derivative(order) - self._zero.derivative(order)
        return self._jets[order] + dw

    def speed(self):
        return np.linalg.norm(self.derivative(1), axis=1)

    def det(self):
        d = self.derivative(1)
        return self._full.points[:, 0] * d[:, 1] - self._full.points[:, 1] * d[:, 0]

    def __getattr__(self, name):
        return getattr(self._full, name)


# ---------------------------------------------------------------------------
# integration

_JET_ORDER = {"projective": {"k": 3, "k1": 4, "k2": 5},
              "euclidean": {"k": 2, "k1": 3, "k2": 4, "t": 3, "t1": 4, "t2": 5}}


def _probe(fn, jets, geometry, shift=0):
    """Highest curve-derivative order a coefficient depends on, with its partial."""
    base = fn(jets)
    best = (0, 0.0)
    for key, order in _JET_ORDER[geometry].items():
        eps = 1e-6 * max(1.0, float(np.max(np.abs(jets[key]))))
        bumped = dict(jets)
        bumped[key] = jets[key] + eps
        partial = float(np.max(np.abs(fn(bumped) - base))) / eps
        if partial > 1e-8 and order + shift >= best[0]:
            best = (order + shift, max(partial, best[1]) if order + shift == best[0] else partial)
    return best


def leading_term(spec: FlowSpec, c) -> tuple[int, float]:
    """Order and coefficient of the leading linear term of the flow at ``c``."""
    d = spec.definition
    if spec.name == "projective-h":
        fn = _coefficient(spec.params["h"], PROJECTIVE_COEFFICIENTS, "h")
        order, coef = _probe(fn, projective_jets(c), "projective")
        return (order, coef) if order else (1, 1.0)
    if spec.name == "euclidean-hg":
        jets = euclidean_jets(c)
        og, cg = _probe(_coefficient(spec.params["g"], EUCLIDEAN_COEFFICIENTS, "g"), jets, "euclidean")
        oh, ch = _probe(_coefficient(spec.params["h"], EUCLIDEAN_COEFFICIENTS, "h"), jets, "euclidean", 1)
        ch /= float(np.min(jets["k"]))
        if og == oh:
            return og, cg + ch
        return (og, cg) if og > oh else (oh, ch) if oh else (1, 1.0)
    return d.order, d.coefficient


def default_dt(spec: FlowSpec, c, safety=0.8) -> float:
    """RK4 stability heuristic for the leading dispersive term of the flow."""
    order, coef = leading_term(spec, c)
    if c.geometry == "euclidean":
        coef *= float(np.min(c.speed())) ** -order
    return stable_dt(c.grid, order, coef, safety=safety)


def record_invariants(c) -> dict:
    """Invariant snapshot used for run histories."""
    if c.geometry == "euclidean":
        inv = curvature_torsion(c)
        return {"kappa": inv.kappa.values, "tau": inv.tau.values}
    if c.geometry == "projective":
        return {"S": schwarzian(c).s.values}
    if c.geometry == "star":
        out = {"det": c.det()}
        try:
            out["p"] = centroaffine_curvature(c).p.values
        except PreconditionError:
            pass
        return out
    ls = lagrangian_schwarzian(c)
    P = c.periodic_part
    off = P - np.einsum("nii->ni", P)[:, :, None] * np.eye(c.size)[None]
    return {"s_d": ls.s_d, "offdiag": np.array([np.max(np.abs(off))])}


@dataclass
class FlowRun:
    spec: FlowSpec
    initial: object
    dt: float
    steps: int
    stride: int
    substeps: int = 1
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    histories: dict = field(default_factory=dict)
    drift: list = field(default_factory=list)
    status: str = "running"
    message: str = ""
    steps_completed: int = 0

    @property
    def final(self):
        return self.snapshots[-1]

    def _record(self, t, c):
        self.times.append(t)
        self.snapshots.append(c)
        for key, val in record_invariants(c).items():
            self.histories.setdefault(key, []).append(val)

    def history(self, key) -> np.ndarray:
        return np.asarray(self.histories[key])

    def summary(self) -> dict:
        out = {"status": self.status, "steps_completed": self.steps_completed,
               "snapshots": len(self.snapshots), "substeps": self.substeps}
        if self.drift:
            out["max_arclength_drift"] = float(max(self.drift))
        for key, vals in self.histories.items():
            arr = np.asarray(vals)
            if arr.ndim >= 2 and len(arr) > 1:
                out[f"{key}_max_change"] = float(np.max(np.abs(arr - arr[0])))
        if self.message:
            out["message"] = self.message
        return out


def run_flow(spec: FlowSpec, c0, dt: float, steps: int, stride: int = 1,
             allow_unstable: bool = False) -> FlowRun:
    """Integrate a flow with RK4 and record invariant histories every ``stride`` steps.

    Each step of size ``dt`` is split into equal RK4 substeps below the
    stability heuristic unless ``allow_unstable`` is set.  Blow-up and loss of
    genericity stop the run; the last finite snapshot is kept.
    """
    _check_geometry(spec, c0)
    if not dt > 0 or steps < 0 or stride < 1:
        raise InvalidInputError("need dt > 0, steps >= 0 and stride >= 1")
    substeps = 1 if allow_unstable else max(1, math.ceil(dt / default_dt(spec, c0) - 1e-9))
    run = FlowRun(spec, c0, dt, steps, stride, substeps)
    c = c0
    run._record(0.0, c)
    h = dt / substeps

    def rhs(state):
        if not np.all(np.isfinite(state)):
            raise BlowUpError("non-finite intermediate RK4 stage")
        return _state_rate(spec, curve_from_state(c, state))

    state = curve_state(c)
    try:
        for step in range(1, steps + 1):
            for _ in range(substeps):
                state = rk4_step(state, rhs, h)
            run.steps_completed = step
            if step % stride == 0 or step == steps:
                c = curve_from_state(c, state)
                if spec.name == "euclidean-hg":
                    run.drift.append(float(np.max(np.abs(c.speed() - 1.0))))
                    c = reparametrize_arclength(c)
                    state = curve_state(c)
                run._record(step * dt, c)
                if not all(np.all(np.isfinite(v)) for v in record_invariants(c).values()):
                    raise BlowUpError("invariants became non-finite", last_state=state, step=step)
    except BlowUpError as exc:
        run.status = "blow-up"
        run.message = f"blow-up after {run.steps_completed} steps: {exc}"
        return run
    except DegenerateCurveError as exc:
        run.status = "degenerate"
        run.message = f"genericity lost after {run.steps_completed} steps: {exc}"
        return run
    run.status = "ok"
    return run


# ---------------------------------------------------------------------------
# invariantization oracle

@dataclass(frozen=True)
class OracleResult:
    value: object          # GridFunction or list of GridFunctions
    error_bound: float     # Richardson estimate, sup norm
    micro_dt: float

    def array(self) -> np.ndarray:
        if isinstance(self.value, GridFunction):
            return self.value.values
        return np.stack([v.values for v in self.value])


def _as_array(val):
    if isinstance(val, GridFunction):
        return val.values, True
    if isinstance(val, (list, tuple)):
        return np.stack([v.values if isinstance(v, GridFunction) else np.asarray(v) for v in val]), False
    return np.asarray(val), True


def invariantization_oracle(spec: FlowSpec, c, invariant_fn: Callable,
                            micro_dt: float = DEFAULT_MICRO_DT, rel_tol: float = ORACLE_REL_TOL,
                            max_dt: float | None = None) -> OracleResult:
    """Time derivative at ``t = 0`` of ``invariant_fn`` along the flow.

    The flow is integrated to ``±delta, ±2 delta, ±4 delta`` (``delta =
    micro_dt``) and differentiated with the 5-point central stencil.  The
    same stencil at ``2 delta`` gives a Richardson error estimate; above
    ``rel_tol`` times the sup norm of the result (and above the roundoff
    level ``10 eps |f| / delta``) an :class:`OracleUnreliableError` is raised.
    """
    _check_geometry(spec, c)
    delta = float(micro_dt)
    if not delta > 0:
        raise InvalidInputError("micro_dt must be positive")
    step = min(delta, max_dt or default_dt(spec, c))
    jets: dict = {}
    w0 = np.zeros_like(curve_state(c))

    def rhs(w):
        return _state_rate(spec, _SplitCurve(c, jets, w))

    samples = {}
    for sign in (1, -1):
        w, t = w0, 0
        for m in (1, 2, 4):
            w = rk4_integrate(w, rhs, sign * (m - t) * delta, step)
            t = m
            samples[sign * m] = _as_array(invariant_fn(_SplitCurve(c, jets, w)))[0]
    f0, single = _as_array(invariant_fn(c))
    # differences below a few ulps of f are roundoff, not truncation
    noise = 10 * np.finfo(float).eps * float(np.max(np.abs(f0))) / delta

    def stencil(h):
        f = {m: samples[m * h] for m in (-2, -1, 1, 2)}
        return (-f[2] + 8 * f[1] - 8 * f[-1] + f[-2]) / (12 * h * delta)

    d1, d2 = stencil(1), stencil(2)
    err = float(np.max(np.abs(d1 - d2))) / 15.0
    scale = float(np.max(np.abs(d1)))
    if err > rel_tol * max(scale, 1e-300) and err > max(noise, 1e-12):
        raise OracleUnreliableError(
            f"time stencil not converged: error estimate {err:.3e} vs magnitude {scale:.3e}",
            error_bound=err)
    grid = c.grid
    value = GridFunction(grid, d1) if single else [GridFunction(grid, r) for r in d1]
    return OracleResult(value, err, delta)


def relative_residual(a, b, filtered: bool = False) -> float:
    """``|a - b|_inf / |b|_inf``; with ``filtered`` both sides are 2/3-truncated first."""
    from .numerics import dealias
    a, b = np.asarray(a), np.asarray(b)
    if filtered:
        a, b = dealias(a, axis=-1), dealias(b, axis=-1)
    denom = float(np.max(np.abs(b)))
    diff = float(np.max(np.abs(a - b)))
    return diff / denom if denom > 0 else diff


__all__ = [
    "EUCLIDEAN_COEFFICIENTS", "FLOWS", "FlowRun", "FlowSpec", "GeomflowError", "OracleResult",
    "PROJECTIVE_COEFFICIENTS", "curve_from_state", "curve_state", "default_dt", "euclidean_jets",
    "flow_spec", "flow_vector_field", "invariantization_oracle", "projective_jets",
    "record_invariants", "relative_residual", "run_flow",
]
