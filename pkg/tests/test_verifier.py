import json

import numpy as np
import pytest

from aus.constructor import SystemBundle
from aus.verifier import (
    CORRUPTIONS,
    corrupt_bundle,
    in_intervals,
    verify_bundle,
    verify_chain,
    verify_disjoint,
    verify_dyadic,
    verify_omega,
)


@pytest.fixture(scope="module")
def report(circle_bundle):
    return verify_bundle(circle_bundle)


def test_clean_bundle_passes(report):
    assert report.passed and report.failed_checks() == []
    assert [r["m"] for r in report.records] == [1, 2, 3]


def test_margins_and_analytic_cross_check(report):
    for rec in report.records:
        assert rec["upper"]["margin"] > 0 and rec["lower"]["margin"] > 0
        # triangle inequality: measured margins are at least eps - sup_err
        assert rec["upper"]["margin"] >= rec["upper"]["analytic_margin"] - 1e-12
        assert rec["lower"]["margin"] >= rec["lower"]["analytic_margin"] - 1e-12


def test_residuals_below_tolerance(circle_bundle):
    for rec in verify_disjoint(circle_bundle):
        assert rec["pass"] and rec["residual"] < 1e-10 and rec["overlap"] == []


def test_chain_values(circle_bundle):
    rows = verify_chain(circle_bundle)
    for row, rec in zip(rows, circle_bundle.records):
        assert row["pass"] and row["delta_consistent"]
        assert row["bound"] == row["delta_sq"] + row["two_delta"]
        assert row["remeasured_sup_err"] == pytest.approx(rec.sup_err, rel=1e-6)
        assert row["bound"] <= row["eps"]
    # delta = 0.1 gives 0.21 <= 0.3
    assert 0.1**2 + 2 * 0.1 == pytest.approx(0.21)


def test_omega_values(circle_bundle):
    rows = verify_omega(circle_bundle)
    assert [r["measure"] for r in rows] == [0.75, 0.875, 0.9375]
    assert [r["bound"] for r in rows] == [0.5, 0.75, 0.875]
    assert all(r["pass"] and r["bound_nondecreasing"] for r in rows)


def test_dyadic_check(circle_bundle):
    d = verify_dyadic(circle_bundle)
    assert d["pass"] and d["equal_weight_rel_err"] < 1e-12


@pytest.mark.parametrize("mode", sorted(CORRUPTIONS))
def test_negative_controls_trip_only_their_check(circle_bundle, mode):
    bad = corrupt_bundle(circle_bundle, mode, 2)
    assert verify_bundle(bad).failed_checks() == [CORRUPTIONS[mode]]
    # the original is untouched
    assert verify_omega(circle_bundle)[1]["pass"]


def test_corruption_survives_persistence(circle_bundle, tmp_path):
    bad = corrupt_bundle(circle_bundle, "support", 3)
    p = tmp_path / "bad.json"
    bad.save(p)
    report = verify_bundle(SystemBundle.load(p))
    assert report.failed_checks() == ["disjoint"]
    assert report.records[2]["disjoint"]["residual"] > 1e-10


def test_support_corruption_needs_lambda(circle_bundle):
    with pytest.raises(ValueError):
        corrupt_bundle(circle_bundle, "support", 1)
    with pytest.raises(ValueError):
        corrupt_bundle(circle_bundle, "rotate", 2)


def test_report_json(report, tmp_path):
    p = tmp_path / "r.json"
    report.save(p)
    obj = json.loads(p.read_text())
    assert obj["pass"] is True and obj["failed_checks"] == []
    assert obj["tolerances"] == {"margin": 1e-9, "residual": 1e-10}
    assert obj["grid"]["per_m"][0]["grid_shape"][0] >= 8192
    assert p.read_text() == report.dumps()


def test_empty_bundle_rejected(circle_bundle):
    import copy

    b = copy.deepcopy(circle_bundle)
    b.records = []
    with pytest.raises(ValueError):
        verify_bundle(b)


def test_in_intervals():
    iv = np.array([[0.1, 0.2], [0.5, 0.7]])
    t = np.array([0.0, 0.1, 0.15, 0.2, 0.3, 0.5, 0.69, 0.7, 0.9])
    assert in_intervals(t, iv).tolist() == [False, True, True, True, False, True, True, True, False]
