import pytest

from geomflow.errors import InvalidInputError
from geomflow.verification import SUITES, TOLERANCES, Check, run_suite


def test_check_comparisons():
    assert Check("a", 1e-5, 1e-4).passed
    assert not Check("a", 1e-3, 1e-4).passed
    assert Check("b", 0.5, 0.1, ">").passed
    assert Check("c", 1.0, 1.0, "==").passed and not Check("c", 0.0, 1.0, "==").passed
    assert not Check("d", float("nan"), 1.0).passed


def test_check_as_dict():
    d = Check("a", 1e-5, 1e-4, detail={"n": 3}).as_dict()
    assert d["passed"] and d["detail"] == {"n": 3} and d["comparison"] == "<"


def test_every_suite_has_tolerances():
    prefixes = {k.split(".")[0] for k in TOLERANCES}
    assert prefixes <= set(SUITES)


def test_unknown_suite():
    with pytest.raises(InvalidInputError):
        run_suite("nosuch")


def test_unknown_tolerance_key():
    with pytest.raises(InvalidInputError):
        run_suite("skewness", {"skewness.nosuch": 1.0})


def test_report_layout():
    rep = run_suite("skewness", seed=3)
    assert rep["suite"] == "skewness" and rep["seed"] == 3 and rep["passed"]
    assert len(rep["checks"]) == 10
