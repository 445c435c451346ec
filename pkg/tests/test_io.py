import json

import numpy as np
import pytest

from geomflow.curves import EuclideanCurve, LagrangianCurve, ProjectiveCurve, StarCurve
from geomflow.errors import InvalidInputError
from geomflow.io import (
    fit_linear_part,
    read_curve,
    read_gridfunction,
    read_matrixfield,
    read_table,
    write_curve,
    write_gridfunction,
    write_matrixfield,
    write_table,
)
from geomflow.numerics import GridFunction, MatrixField, PeriodicGrid


def test_gridfunction_round_trip(tmp_path, grid64):
    f = GridFunction(grid64, np.random.default_rng(1).normal(size=64))
    back = read_gridfunction(write_gridfunction(tmp_path / "f.csv", f))
    assert np.array_equal(back.values, f.values) and back.grid.length == grid64.length


def test_matrixfield_round_trip(tmp_path, grid64):
    m = MatrixField(grid64, np.random.default_rng(2).normal(size=(64, 2, 2)), lam=0.3)
    back = read_matrixfield(write_matrixfield(tmp_path / "m.csv", m))
    assert np.array_equal(back.values, m.values) and back.lam == 0.3


@pytest.mark.parametrize("curve", [
    lambda g: EuclideanCurve.from_function(g, lambda t: np.stack([np.cos(t), np.sin(t), 0.3 * t], 1),
                                           drift=(0, 0, 0.3)),
    lambda g: ProjectiveCurve.from_function(g, lambda x: 0.1 * np.sin(x)),
    lambda g: StarCurve(g, np.stack([np.cos(g.points), np.sin(g.points)], 1)),
    lambda g: LagrangianCurve.diagonal(g, [0.1 * np.sin(g.points), 0.05 * np.cos(g.points)]),
])
def test_curve_round_trip_with_sidecar(tmp_path, grid64, curve):
    c = curve(grid64)
    path = write_curve(tmp_path / "c.csv", c)
    back = read_curve(path, c.geometry)
    assert np.array_equal(getattr(back, "points", getattr(back, "values", None)),
                          getattr(c, "points", getattr(c, "values", None)))
    assert (tmp_path / "c.csv.json").exists()


def test_projective_curve_without_sidecar(tmp_path, grid64):
    c = ProjectiveCurve.from_function(grid64, lambda x: 0.1 * np.sin(x), slope=1.5)
    path = write_curve(tmp_path / "c.csv", c)
    (tmp_path / "c.csv.json").unlink()
    back = read_curve(path, "projective")
    assert back.grid.length == pytest.approx(grid64.length, rel=1e-14)
    assert back.slope == pytest.approx(1.5, abs=1e-12)


def test_fit_linear_part_exact(grid64):
    x = grid64.points
    assert fit_linear_part(0.7 * x + np.sin(3 * x), x) == pytest.approx(0.7, abs=1e-12)


def test_malformed_row_is_named(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,u\n0,1\n1,2\n2,oops\n")
    # rows are counted as file lines, header included
    with pytest.raises(InvalidInputError, match="row 4"):
        read_table(p)


def test_table_round_trip_is_bit_exact(tmp_path):
    cols = [np.array([0.1, 1 / 3, np.pi]), np.array([1e-300, -2.5, 7.0])]
    header, arr = read_table(write_table(tmp_path / "t.csv", ["a", "b"], cols))
    assert header == ["a", "b"]
    assert np.array_equal(arr[:, 0], cols[0]) and np.array_equal(arr[:, 1], cols[1])


def test_wrong_geometry_columns(tmp_path, grid64):
    c = ProjectiveCurve.from_function(grid64, lambda x: 0.1 * np.sin(x))
    path = write_curve(tmp_path / "c.csv", c)
    with pytest.raises(InvalidInputError):
        read_curve(path, "euclidean")


def test_sidecar_is_json(tmp_path, grid64):
    c = ProjectiveCurve.from_function(grid64, lambda x: 0.1 * np.sin(x))
    write_curve(tmp_path / "c.csv", c)
    meta = json.loads((tmp_path / "c.csv.json").read_text())
    assert meta["geometry"] == "projective"
