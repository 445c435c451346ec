"""
Command line entry point: ``geomflow simulate|verify|invariants``.

Exit codes: 0 success, 1 configuration or input error (unknown key, bad
schema, unknown suite, failed verification), 2 a run that did not finish
(blow-up or loss of genericity; the last finite snapshot is still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .akns import euclidean_frame_pair, kdv_akns_pair, residual_report
from .curves import (
    EuclideanCurve,
    LagrangianCurve,
    ProjectiveCurve,
    check_generic,
    projective_to_star,
    reparametrize_arclength,
)
from .errors import GeomflowError
from .flows import FLOWS, default_dt, flow_spec, run_flow
from .invariants import centroaffine_curvature, curvature_torsion, hasimoto, lagrangian_schwarzian, schwarzian
from .io import read_curve, write_json, write_report, write_run, write_table
from .numerics import PeriodicGrid
from .verification import SUITES, TOLERANCES, nls_gauge_residuals, run_suite

GEOMETRIES = ("euclidean", "projective", "star", "lagrangian")
CHECKS = ("akns", "nls", "genericity")
INITIAL_CURVES = {
    "euclidean": ("circle", "torus-knot", "saddle", "random"),
    "projective": ("sine", "random"),
    "star": ("sine", "random"),
    "lagrangian": ("diagonal", "random"),
}
CONFIG_DEFAULTS = {
    "flow": None, "geometry": None, "params": {}, "n": 256, "period": 2 * np.pi,
    "dt": None, "steps": 100, "stride": 1, "checks": [], "out": None, "seed": 0,
    "curve": None, "initial": None, "amplitude": 0.1, "allow_unstable": False,
}


class ConfigError(GeomflowError):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors: exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def default_out() -> Path:
    return Path(os.environ.get("GEOMFLOW_OUT", "geomflow_out"))


# ---------------------------------------------------------------------------
# configuration

def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path, overrides: dict) -> dict:
    """Merge defaults, an optional JSON file and command line overrides."""
    cfg = dict(CONFIG_DEFAULTS)
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        for key in data:
            if key not in CONFIG_DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
        cfg.update(data)
    for key, val in overrides.items():
        if val is None:
            continue
        if key == "params":
            cfg["params"] = {**(cfg.get("params") or {}), **val}
        else:
            cfg[key] = val
    return validate_config(cfg)


def _require(ok, key, msg):
    if not ok:
        raise ConfigError(f"invalid {key!r}: {msg}")


def validate_config(cfg: dict) -> dict:
    for key in cfg:
        if key not in CONFIG_DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
    _require(cfg["flow"] in FLOWS, "flow", f"must be one of {sorted(FLOWS)}")
    geometry = FLOWS[cfg["flow"]].geometry
    _require(cfg["geometry"] in (None, geometry), "geometry",
             f"flow {cfg['flow']!r} acts on {geometry} curves")
    cfg["geometry"] = geometry
    _require(isinstance(cfg["params"], dict), "params", "must be an object")
    try:
        flow_spec(cfg["flow"], **cfg["params"])
    except GeomflowError as exc:
        raise ConfigError(f"invalid 'params': {exc}") from None
    _require(isinstance(cfg["n"], int) and cfg["n"] >= 8, "n", "must be an integer >= 8")
    _require(isinstance(cfg["period"], (int, float)) and cfg["period"] > 0, "period", "must be positive")
    _require(cfg["dt"] is None or (isinstance(cfg["dt"], (int, float)) and cfg["dt"] > 0),
             "dt", "must be positive")
    _require(isinstance(cfg["steps"], int) and cfg["steps"] >= 0, "steps", "must be a nonnegative integer")
    _require(isinstance(cfg["stride"], int) and cfg["stride"] >= 1, "stride", "must be a positive integer")
    _require(isinstance(cfg["checks"], list) and all(c in CHECKS for c in cfg["checks"]),
             "checks", f"must be a list drawn from {list(CHECKS)}")
    _require(isinstance(cfg["seed"], int), "seed", "must be an integer")
    _require(isinstance(cfg["amplitude"], (int, float)), "amplitude", "must be a number")
    _require(isinstance(cfg["allow_unstable"], bool), "allow_unstable", "must be true or false")
    if cfg["initial"] is None and cfg["curve"] is None:
        cfg["initial"] = INITIAL_CURVES[geometry][0]
    _require(cfg["curve"] is None or cfg["initial"] is None, "curve", "give either 'curve' or 'initial'")
    _require(cfg["initial"] is None or cfg["initial"] in INITIAL_CURVES[geometry], "initial",
             f"{geometry} curves: {list(INITIAL_CURVES[geometry])}")
    return cfg


# ---------------------------------------------------------------------------
# initial data

def _bandlimited(rng, x, period, modes=4):
    w = 2 * np.pi / period
    out = np.zeros_like(x)
    for m in range(1, modes + 1):
        a, b = rng.normal(size=2)
        out += (a * np.cos(m * w * x) + b * np.sin(m * w * x)) / m ** 2
    return out


def _scaled(p, amplitude, period):
    """Rescale a periodic profile so that ``max |p'| = amplitude``."""
    from .numerics import spectral_derivative
    d = np.max(np.abs(spectral_derivative(p, period, 1)))
    return p * (amplitude / d if d > 0 else 0.0)


def initial_curve(cfg: dict):
    """Built-in initial curve, or the curve file given in the config."""
    geometry = cfg["geometry"]
    if cfg["curve"]:
        return read_curve(cfg["curve"], geometry)
    grid = PeriodicGrid(cfg["n"], float(cfg["period"]))
    x, L, a = grid.points, grid.length, float(cfg["amplitude"])
    w = 2 * np.pi / L
    rng = np.random.default_rng(cfg["seed"])
    name = cfg["initial"]
    if geometry in ("projective", "star"):
        p = a / w * np.sin(w * x) if name == "sine" else _scaled(_bandlimited(rng, x, L), a, L)
        u = ProjectiveCurve(grid, p, 1.0)
        return u if geometry == "projective" else projective_to_star(u)
    if geometry == "lagrangian":
        if name == "diagonal":
            P = np.zeros((grid.n, 2, 2))
            P[:, 0, 0] = a / w * np.sin(w * x)
            P[:, 1, 1] = 0.8 * a / w * np.cos(2 * w * x) / 2
        else:
            a11, a22, a12 = (_scaled(_bandlimited(rng, x, L), a, L) for _ in range(3))
            P = np.stack([np.stack([a11, 0.5 * a12], -1), np.stack([0.5 * a12, a22], -1)], -2)
        return LagrangianCurve(grid, P, np.eye(2))
    if name == "circle":
        pts = np.stack([np.cos(w * x), np.sin(w * x), np.zeros_like(x)], axis=1)
    elif name == "torus-knot":
        pts = np.stack([(1.5 + 0.3 * np.cos(3 * w * x)) * np.cos(w * x),
                        (1.5 + 0.3 * np.cos(3 * w * x)) * np.sin(w * x),
                        0.3 * np.sin(3 * w * x) + 0.05 * np.cos(2 * w * x)], axis=1)
    elif name == "saddle":
        pts = np.stack([np.cos(w * x) + 0.05 * np.cos(2 * w * x), np.sin(w * x) - 0.03 * np.sin(3 * w * x),
                        0.3 * np.cos(2 * w * x) + 0.1 * np.sin(w * x)], axis=1)
    else:
        pts = np.stack([np.cos(w * x), np.sin(w * x), np.zeros_like(x)], axis=1)
        pts = pts + a * np.stack([_bandlimited(rng, x, L) for _ in range(3)], axis=1)
    return reparametrize_arclength(EuclideanCurve(grid, pts))


# ---------------------------------------------------------------------------
# post-run checks

def run_checks(run, names) -> dict:
    out = {}
    for name in names:
        try:
            if name == "genericity":
                rep = check_generic(run.final)
                out[name] = {"margins": rep.margins, "passed": rep.passed}
            elif name == "akns":
                if run.spec.name == "schwarzian-kdv":
                    # u_t = u' S is the lam = 0 realization run at time scale -2
                    pair = kdv_akns_pair(run, 0.0)
                    out[name] = residual_report(pair.with_B(-2.0 * pair.B)).as_dict()
                elif run.spec.name == "schwarzian-kdv-lambda":
                    lam = float(run.spec.params["lam"])
                    out[name] = residual_report(kdv_akns_pair(run, lam)).as_dict()
                    out[name]["exponent"] = run.spec.params["exponent"]
                elif run.spec.geometry == "projective":
                    out[name] = {"skipped": f"no pair for flow {run.spec.name!r}"}
                elif run.spec.geometry == "euclidean":
                    from .akns import zero_curvature_residual
                    out[name] = {"lambda": 0.0,
                                 "residual": zero_curvature_residual(euclidean_frame_pair(run, 0.0))}
                else:
                    out[name] = {"skipped": f"no pair for {run.spec.geometry} curves"}
            elif name == "nls":
                if run.spec.geometry != "euclidean":
                    out[name] = {"skipped": "needs a Euclidean run"}
                else:
                    res, cs = nls_gauge_residuals(run.times, run.history("kappa"), run.history("tau"),
                                                  run.initial.grid)
                    out[name] = {"residual": float(res.max()), "c": cs.tolist()}
        except GeomflowError as exc:
            out[name] = {"error": str(exc)}
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args) -> int:
    overrides = {"flow": args.flow, "geometry": args.geometry, "n": args.n, "period": args.period,
                 "dt": args.dt, "steps": args.steps, "stride": args.stride, "checks": args.checks,
                 "out": args.out, "seed": args.seed, "curve": args.curve, "initial": args.initial,
                 "amplitude": args.amplitude, "allow_unstable": args.allow_unstable or None,
                 "params": dict(_kv(p, "param") for p in args.param) if args.param else None}
    if args.curve:
        overrides["initial"] = None
    cfg = load_config(args.config, overrides)
    spec = flow_spec(cfg["flow"], **cfg["params"])
    c0 = initial_curve(cfg)
    dt = cfg["dt"] or default_dt(spec, c0)
    cfg["dt"] = dt
    out = Path(cfg["out"]) if cfg["out"] else default_out()
    cfg["out"] = str(out)
    run = run_flow(spec, c0, dt, cfg["steps"], cfg["stride"], cfg["allow_unstable"])
    checks = run_checks(run, cfg["checks"])
    write_run(out, run, cfg, {"checks": checks})
    print(f"{run.status}: {run.steps_completed}/{cfg['steps']} steps, "
          f"{len(run.snapshots)} snapshots -> {out}")
    if run.status != "ok":
        print(run.message, file=sys.stderr)
        return 2
    return 0


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; known: {', '.join(SUITES)}", file=sys.stderr)
        return 1
    tols = dict(_kv(t, "tol") for t in args.tol) if args.tol else {}
    for key in tols:
        if key not in TOLERANCES:
            print(f"unknown tolerance key {key!r}", file=sys.stderr)
            return 1
    report = run_suite(args.suite, tols, args.seed)
    out = Path(args.out) if args.out else default_out()
    path = write_report(out / f"verify_{args.suite}.json", report)
    for c in report["checks"]:
        mark = "pass" if c["passed"] else "FAIL"
        print(f"{mark}  {c['name']}: {c['value']:.3e} ({c['comparison']} {c['tolerance']:g})")
    print(f"{args.suite}: {'pass' if report['passed'] else 'FAIL'} -> {path}")
    return 0 if report["passed"] else 1


def cmd_invariants(args) -> int:
    c = read_curve(args.file, args.geometry, strict=False)
    out = Path(args.out) if args.out else default_out()
    stem = Path(args.file).stem
    x = c.grid.points
    written = []
    if args.geometry == "euclidean":
        inv = curvature_torsion(c)
        phi = hasimoto(inv).phi.values
        written.append(write_table(out / f"{stem}_invariants.csv", ["x", "kappa", "tau"],
                                   [x, inv.kappa.values, inv.tau.values]))
        written.append(write_table(out / f"{stem}_hasimoto.csv", ["x", "phi_re", "phi_im"],
                                   [x, phi.real, phi.imag]))
    elif args.geometry == "projective":
        written.append(write_table(out / f"{stem}_invariants.csv", ["x", "S"], [x, schwarzian(c).s.values]))
    elif args.geometry == "star":
        cols, header = [x, c.det()], ["x", "det"]
        if c.normalized:
            cols.append(centroaffine_curvature(c).p.values)
            header.append("p")
        written.append(write_table(out / f"{stem}_invariants.csv", header, cols))
    else:
        ls = lagrangian_schwarzian(c)
        m = ls.s_d.shape[1]
        written.append(write_table(out / f"{stem}_invariants.csv", ["x"] + [f"s_d{i + 1}" for i in range(m)],
                                   [x] + [ls.s_d[:, i] for i in range(m)]))
    write_json(out / f"{stem}_invariants.json", {"input": str(args.file), "geometry": args.geometry,
                                                  "n": c.grid.n, "period": c.grid.length,
                                                  "files": [p.name for p in written]})
    for p in written:
        print(p)
    return 0


def _kv(text, what):
    if "=" not in text:
        raise ConfigError(f"--{what} expects key=value, got {text!r}")
    key, val = text.split("=", 1)
    return key.strip(), _parse_value(val)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="geomflow", description=__doc__.strip().splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a geometric flow and record invariant histories")
    sim.add_argument("--config", help="JSON config file; flags override its entries")
    sim.add_argument("--flow", choices=sorted(FLOWS))
    sim.add_argument("--geometry", choices=GEOMETRIES)
    sim.add_argument("--param", action="append", metavar="KEY=VALUE", help="flow parameter (repeatable)")
    sim.add_argument("--n", type=int)
    sim.add_argument("--period", type=float)
    sim.add_argument("--dt", type=float, help="output step; split into stable RK4 substeps")
    sim.add_argument("--steps", type=int)
    sim.add_argument("--stride", type=int, help="record every STRIDE steps")
    sim.add_argument("--checks", nargs="*", choices=CHECKS)
    sim.add_argument("--curve", help="initial curve CSV")
    sim.add_argument("--initial", help="built-in initial curve")
    sim.add_argument("--amplitude", type=float)
    sim.add_argument("--allow-unstable", action="store_true", help="no substepping")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", help="output directory (default $GEOMFLOW_OUT or ./geomflow_out)")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("suite", help=", ".join(SUITES))
    ver.add_argument("--tol", action="append", metavar="KEY=VALUE", help="tolerance override (repeatable)")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out")
    ver.set_defaults(func=cmd_verify)

    inv = sub.add_parser("invariants", help="compute invariants of a curve file")
    inv.add_argument("file")
    inv.add_argument("--geometry", choices=GEOMETRIES, required=True)
    inv.add_argument("--out")
    inv.set_defaults(func=cmd_invariants)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except GeomflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
