"""
CSV/JSON formats for fields, curves, operator dumps, run manifests and
residual reports.

All numbers are written with 17 significant digits so that files round-trip
exactly; JSON is written with sorted keys and no timestamps so identical
inputs give byte-identical outputs.

Curve CSVs carry an ``x`` column followed by the samples:

=========== ===============================
geometry    columns
=========== ===============================
euclidean   ``x,u1,u2,u3``
projective  ``x,u``
star        ``x,g1,g2``
lagrangian  ``x,a11,a12,...`` (row-major)
=========== ===============================

A ``<file>.json`` sidecar holds the period and the non-periodic part
(drift, slope or monodromy shift).  Without a sidecar the period is read
from the node spacing and the linear part is fitted.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .curves import EuclideanCurve, LagrangianCurve, ProjectiveCurve, StarCurve
from .errors import InvalidInputError, ShapeMismatchError
from .numerics import GridFunction, MatrixField, PeriodicGrid

FMT = "%.17g"

GEOMETRY_COLUMNS = {
    "euclidean": ["u1", "u2", "u3"],
    "projective": ["u"],
    "star": ["g1", "g2"],
}


class SchemaError(InvalidInputError):
    """File does not match the expected layout."""


def _num(v) -> str:
    return FMT % v


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_table(path, header, columns) -> Path:
    """Write equal-length columns with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_num(v) for v in row])
    return path


def read_table(path):
    """Read a numeric CSV; returns ``(header, array)``.  Errors name the row."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise SchemaError(f"{path}: row {lineno} is not numeric: {row!r}") from None
            if not all(np.isfinite(vals)):
                raise SchemaError(f"{path}: row {lineno} contains non-finite values")
            rows.append(vals)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return header, np.array(rows)


# ---------------------------------------------------------------------------
# grid functions and matrix fields

def write_gridfunction(path, f: GridFunction, name="value") -> Path:
    vals = f.values
    if np.iscomplexobj(vals):
        out = write_table(path, ["x", f"{name}_re", f"{name}_im"], [f.grid.points, vals.real, vals.imag])
    else:
        out = write_table(path, ["x", name], [f.grid.points, vals])
    write_json(_sidecar(path), {"kind": "gridfunction", "n": f.grid.n, "period": f.grid.length,
                                "slope": f.slope})
    return out


def read_gridfunction(path) -> GridFunction:
    header, data = read_table(path)
    meta = _read_sidecar(path)
    grid = PeriodicGrid(len(data), meta.get("period", _period_from_nodes(data[:, 0])))
    if len(header) == 3:
        vals = data[:, 1] + 1j * data[:, 2]
    elif len(header) == 2:
        vals = data[:, 1]
    else:
        raise SchemaError(f"{path}: expected columns x,value")
    return GridFunction(grid, vals, meta.get("slope", 0.0))


def write_matrixfield(path, m: MatrixField) -> Path:
    k = m.values.shape[-1]
    header = ["x"] + [f"a{i + 1}{j + 1}" for i in range(k) for j in range(k)]
    flat = m.values.reshape(m.grid.n, k * k)
    out = write_table(path, header, [m.grid.points] + [flat[:, c] for c in range(k * k)])
    write_json(_sidecar(path), {"kind": "matrixfield", "n": m.grid.n, "period": m.grid.length,
                                "size": k, "lambda": m.lam})
    return out


def read_matrixfield(path) -> MatrixField:
    header, data = read_table(path)
    k = int(round(np.sqrt(len(header) - 1)))
    if k * k != len(header) - 1:
        raise SchemaError(f"{path}: matrix field needs x plus k*k columns")
    meta = _read_sidecar(path)
    grid = PeriodicGrid(len(data), meta.get("period", _period_from_nodes(data[:, 0])))
    return MatrixField(grid, data[:, 1:].reshape(len(data), k, k), meta.get("lambda"))


# ---------------------------------------------------------------------------
# curves

def _sidecar(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def _read_sidecar(path) -> dict:
    side = _sidecar(path)
    if side.exists():
        try:
            return json.loads(side.read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{side}: invalid JSON ({exc})") from None
    return {}


def _period_from_nodes(x):
    n = len(x)
    if n < 2:
        raise SchemaError("need at least two nodes")
    dx = np.diff(x)
    if np.max(np.abs(dx - dx[0])) > 1e-9 * max(1.0, abs(dx[0])) or dx[0] <= 0:
        raise SchemaError("x column must be increasing and equally spaced")
    if abs(x[0]) > 1e-12 * max(1.0, abs(dx[0])):
        raise SchemaError("x column must start at 0")
    return float(dx[0] * n)


def fit_linear_part(values, ramp):
    """Coefficient ``m`` making ``values - m * ramp`` band-limited.

    Least squares on the upper half of the spectrum; exact for samples of
    ``m * ramp + p`` with ``p`` resolved on the grid.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    modes = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    hi = modes > n // 4
    a = np.fft.fft(ramp)[hi]
    b = np.fft.fft(values, axis=0)[hi]
    denom = np.vdot(a, a).real
    if denom == 0:
        return np.zeros(values.shape[1:])
    return np.real(np.tensordot(np.conj(a), b, axes=(0, 0)) / denom)


def write_curve(path, c) -> Path:
    x = c.grid.points
    meta = {"geometry": c.geometry, "n": c.grid.n, "period": c.grid.length}
    if c.geometry == "euclidean":
        out = write_table(path, ["x"] + GEOMETRY_COLUMNS["euclidean"],
                          [x] + [c.points[:, i] for i in range(3)])
        meta["drift"] = c.drift
    elif c.geometry == "projective":
        out = write_table(path, ["x", "u"], [x, c.values])
        meta["slope"] = c.slope
    elif c.geometry == "star":
        out = write_table(path, ["x", "g1", "g2"], [x, c.points[:, 0], c.points[:, 1]])
        meta["monodromy_shift"] = c.monodromy_shift
    else:
        m = c.size
        M = c.matrices.reshape(c.grid.n, m * m)
        header = ["x"] + [f"a{i + 1}{j + 1}" for i in range(m) for j in range(m)]
        out = write_table(path, header, [x] + [M[:, k] for k in range(m * m)])
        meta["slope"] = c.slope
    write_json(_sidecar(path), meta)
    return out


def read_curve(path, geometry: str, strict: bool = True):
    """Read a curve CSV of the given geometry (sidecar optional)."""
    header, data = read_table(path)
    meta = _read_sidecar(path)
    if meta.get("geometry", geometry) != geometry:
        raise SchemaError(f"{path}: sidecar says {meta['geometry']!r}, expected {geometry!r}")
    if header[0] != "x":
        raise SchemaError(f"{path}: first column must be 'x'")
    n = len(data)
    x = data[:, 0]
    period = float(meta.get("period", _period_from_nodes(x)))
    grid = PeriodicGrid(n, period)
    if np.max(np.abs(x - grid.points)) > 1e-9 * max(1.0, period):
        raise SchemaError(f"{path}: x column does not match a uniform periodic grid")
    vals = data[:, 1:]
    if geometry == "euclidean":
        _expect(path, header, GEOMETRY_COLUMNS["euclidean"])
        drift = np.asarray(meta["drift"]) if "drift" in meta else fit_linear_part(vals, x)
        return EuclideanCurve(grid, vals, drift, strict)
    if geometry == "projective":
        _expect(path, header, ["u"])
        slope = float(meta["slope"]) if "slope" in meta else float(fit_linear_part(vals[:, 0], x))
        return ProjectiveCurve(grid, vals[:, 0] - slope * x, slope, strict)
    if geometry == "star":
        _expect(path, header, ["g1", "g2"])
        if "monodromy_shift" in meta:
            shift = float(meta["monodromy_shift"])
        else:
            shift = float(fit_linear_part(vals[:, 1], x * vals[:, 0] / period))
        return StarCurve(grid, vals, shift, strict)
    if geometry == "lagrangian":
        m = int(round(np.sqrt(vals.shape[1])))
        if m * m != vals.shape[1]:
            raise SchemaError(f"{path}: Lagrangian curve needs x plus m*m columns")
        M = vals.reshape(n, m, m)
        slope = np.asarray(meta["slope"]) if "slope" in meta else fit_linear_part(M, x)
        return LagrangianCurve(grid, M - x[:, None, None] * slope, slope, strict)
    raise SchemaError(f"unknown geometry {geometry!r}")


def _expect(path, header, cols):
    if header[1:] != cols:
        raise SchemaError(f"{path}: expected columns {['x'] + cols}, got {header}")


# ---------------------------------------------------------------------------
# runs and reports

def write_history(path, times, values, prefix="v") -> Path:
    """Time series: one row per snapshot, ``t`` then one column per node/value."""
    values = np.asarray(values, dtype=float)
    values = values.reshape(len(times), -1)
    header = ["t"] + [f"{prefix}{j}" for j in range(values.shape[1])]
    return write_table(path, header, [np.asarray(times)] + [values[:, j] for j in range(values.shape[1])])


def write_run(outdir, run, config: dict, extra: dict | None = None) -> dict:
    """Write manifest, invariant histories and initial/final snapshots of a FlowRun."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {"initial": write_curve(outdir / "initial.csv", run.initial).name,
             "final": write_curve(outdir / "final.csv", run.final).name}
    hist_files = {}
    for key, vals in run.histories.items():
        arr = np.asarray(vals)
        if arr.ndim == 3:
            for comp in range(arr.shape[2]):
                name = f"history_{key}_{comp}.csv"
                write_history(outdir / name, run.times, arr[:, :, comp])
                hist_files[f"{key}_{comp}"] = name
        else:
            name = f"history_{key}.csv"
            write_history(outdir / name, run.times, arr)
            hist_files[key] = name
    files["histories"] = hist_files
    if run.drift:
        write_history(outdir / "arclength_drift.csv", run.times[1:], np.asarray(run.drift)[:, None],
                      prefix="drift")
        files["drift"] = "arclength_drift.csv"
    manifest = {
        "config": config,
        "flow": run.spec.describe(),
        "grid": {"n": run.initial.grid.n, "period": run.initial.grid.length},
        "dt": run.dt, "steps": run.steps, "stride": run.stride, "substeps": run.substeps,
        "summary": run.summary(),
        "files": files,
    }
    manifest.update(extra or {})
    write_json(outdir / "manifest.json", manifest)
    return manifest


def write_operator(path, op) -> Path:
    return write_json(path, op.describe())


def write_report(path, report) -> Path:
    return write_json(path, report)


__all__ = [
    "SchemaError", "fit_linear_part", "read_curve", "read_gridfunction", "read_matrixfield",
    "read_table", "write_curve", "write_gridfunction", "write_history", "write_json",
    "write_matrixfield", "write_operator", "write_report", "write_run", "write_table",
]
