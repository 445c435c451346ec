import json

import numpy as np
import pytest

from geomflow.cli import main
from geomflow.curves import EuclideanCurve
from geomflow.io import read_table, write_curve
from geomflow.numerics import PeriodicGrid
from geomflow.verification import sine_curve


@pytest.fixture(autouse=True)
def out_env(tmp_path, monkeypatch):
    monkeypatch.setenv("GEOMFLOW_OUT", str(tmp_path / "default_out"))
    return tmp_path


def simulate(out, *extra):
    return main(["simulate", "--flow", "schwarzian-kdv", "--n", "64", "--dt", "1e-4", "--steps", "6",
                 "--stride", "2", "--out", str(out), *extra])


def test_simulate_writes_manifest_and_history(tmp_path):
    assert simulate(tmp_path / "run", "--checks", "akns") == 0
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert manifest["summary"]["status"] == "ok"
    assert manifest["checks"]["akns"]
    header, arr = read_table(tmp_path / "run" / "history_S.csv")
    assert header[0] == "t" and arr.shape == (4, 65)


def test_simulate_default_out(tmp_path):
    assert main(["simulate", "--flow", "schwarzian-kdv", "--n", "32", "--steps", "2"]) == 0
    assert (tmp_path / "default_out" / "manifest.json").exists()


def test_simulate_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert simulate(tmp_path / name, "--initial", "random", "--seed", "7") == 0
    for f in ("initial.csv", "final.csv", "history_S.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_blow_up_exit_code(tmp_path):
    code = main(["simulate", "--flow", "schwarzian-kdv", "--n", "64", "--dt", "1e-2", "--steps", "50",
                 "--allow-unstable", "--out", str(tmp_path / "r")])
    assert code == 2
    assert json.loads((tmp_path / "r" / "manifest.json").read_text())["summary"]["status"] != "ok"


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"flow": "schwarzian-kdv", "colour": "red"}))
    assert main(["simulate", "--config", str(cfg)]) == 1
    assert "colour" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"flow": "schwarzian-kdv", "n": 32, "steps": 50, "dt": 1e-4}))
    assert main(["simulate", "--config", str(cfg), "--steps", "3", "--out", str(tmp_path / "r")]) == 0
    manifest = json.loads((tmp_path / "r" / "manifest.json").read_text())
    assert manifest["config"]["steps"] == 3 and manifest["config"]["n"] == 32


def test_unknown_flow_param(tmp_path):
    assert main(["simulate", "--flow", "schwarzian-kdv", "--param", "lam=1", "--out", str(tmp_path)]) == 1


def test_circle_curve_file(tmp_path):
    g = PeriodicGrid(64)
    c = EuclideanCurve.from_function(g, lambda t: np.stack([np.cos(t), np.sin(t), 0 * t], 1))
    write_curve(tmp_path / "circle.csv", c)
    assert main(["simulate", "--flow", "vortex-filament", "--curve", str(tmp_path / "circle.csv"),
                 "--dt", "1e-3", "--steps", "4", "--out", str(tmp_path / "r")]) == 0
    _, kappa = read_table(tmp_path / "r" / "history_kappa.csv")
    assert np.max(np.abs(kappa[:, 1:] - 1)) < 1e-8


def test_verify_frames(tmp_path, capsys):
    assert main(["verify", "frames", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify_frames.json").read_text())
    assert report["passed"] and "normalization" in capsys.readouterr().out


def test_verify_kdv_invariantization(tmp_path):
    assert main(["verify", "kdv-invariantization", "--out", str(tmp_path)]) == 0


def test_verify_tolerance_override_can_fail(tmp_path):
    code = main(["verify", "skewness", "--tol", "skewness.adjoint=1e-30", "--out", str(tmp_path)])
    assert code == 1


def test_verify_unknown_suite(tmp_path):
    assert main(["verify", "nosuch", "--out", str(tmp_path)]) == 1


def test_verify_unknown_tolerance(tmp_path):
    assert main(["verify", "frames", "--tol", "frames.nosuch=1", "--out", str(tmp_path)]) == 1


def test_invariants_circle(tmp_path):
    g = PeriodicGrid(64)
    c = EuclideanCurve.from_function(g, lambda t: np.stack([2 * np.cos(t), 2 * np.sin(t), 0 * t], 1))
    write_curve(tmp_path / "circle.csv", c)
    assert main(["invariants", str(tmp_path / "circle.csv"), "--geometry", "euclidean",
                 "--out", str(tmp_path)]) == 0
    header, arr = read_table(tmp_path / "circle_invariants.csv")
    assert header == ["x", "kappa", "tau"] and np.allclose(arr[:, 1], 0.5, atol=1e-10)
    assert (tmp_path / "circle_hasimoto.csv").exists()


def test_invariants_projective_without_sidecar(tmp_path):
    u = sine_curve(64)
    write_curve(tmp_path / "u.csv", u)
    (tmp_path / "u.csv.json").unlink()
    assert main(["invariants", str(tmp_path / "u.csv"), "--geometry", "projective",
                 "--out", str(tmp_path)]) == 0
    _, arr = read_table(tmp_path / "u_invariants.csv")
    assert arr[0, 1] == pytest.approx(-1 / 11, abs=1e-9)


def test_invariants_malformed_csv(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("x,u\n0,0\n1,x\n")
    assert main(["invariants", str(tmp_path / "bad.csv"), "--geometry", "projective"]) == 1
    assert "row 3" in capsys.readouterr().err


def test_bad_arguments_exit_one():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--n", "notanumber"])
    assert exc.value.code == 1
