"""Acceptance criteria 1-12, one verification suite each, at the default tolerances.

Run under pytest or directly with ``python tests/test_acceptance.py``.
"""

import pytest

from geomflow.verification import run_suite

CRITERIA = {
    1: "kdv-invariantization",
    2: "general-h",
    3: "sawada-kotera",
    4: "hasimoto-nls",
    5: "euclid-P",
    6: "skewness",
    7: "akns-kdv",
    8: "frames",
    9: "lagrangian-decoupled",
    10: "conformal-cc",
    11: "pinkall",
    12: "invariance",
}


def summary_line(number, report):
    worst = ", ".join(f"{c['name']}={c['value']:.2e}" for c in report["checks"] if not c["passed"])
    status = "PASS" if report["passed"] else f"FAIL ({worst})"
    return f"criterion {number:2d} [{report['suite']}]: {status} in {report['elapsed_s']:.2f}s"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    report = run_suite(CRITERIA[number])
    with capsys.disabled():
        print("\n" + summary_line(number, report))
    failed = [c for c in report["checks"] if not c["passed"]]
    assert not failed, failed


if __name__ == "__main__":
    import sys

    ok = True
    for n in sorted(CRITERIA):
        rep = run_suite(CRITERIA[n])
        ok &= rep["passed"]
        print(summary_line(n, rep))
    sys.exit(0 if ok else 1)
