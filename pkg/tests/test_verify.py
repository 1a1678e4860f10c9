"""Verification batteries: completeness, determinism, sensitivity."""

import json

import pytest

import pseudosphere.verify as vf

EXPECTED_CHECKS = {
    "reduced-system", "base-metric", "base-curvature", "lift-metric",
    "pseudo-spherical", "normal-frame", "closed-form-agreement",
    "variant-identity", "gauss-codazzi-ricci", "torsion-gradient",
    "rank-degeneracy", "ambient-flattening", "image-curvature",
    "frame-alignment", "holonomicity", "frobenius", "null-curves",
    "control-nonholonomic", "control-perturbed-forms",
}


def test_full_battery_passes(report1, report2):
    for report in (report1, report2):
        assert {c.name for c in report.checks} == EXPECTED_CHECKS
        assert report.failed_names() == []
        assert report.passed


def test_report_serializable(report1):
    d = report1.to_dict()
    text = json.dumps(d, sort_keys=True)
    assert json.loads(text) == d
    summary = report1.summary()
    assert summary.count("PASS") >= len(EXPECTED_CHECKS)
    assert "overall: PASS" in summary


def test_case_identification(ident1, ident2):
    for ident in (ident1, ident2):
        assert {c.name for c in ident.checks} == {"canonical-match",
                                                  "template-control"}
        assert ident.passed


def test_sweep(sweep_report):
    assert sweep_report.passed
    rows = sweep_report.checks[0].measured
    assert [r["a"] for r in rows] == [1.5, 2.0, 4.0, 8.0]
    ks = [r["K_measured"] for r in rows]
    assert all(k2 > k1 for k1, k2 in zip(ks, ks[1:]))
    assert all(k < -1.0 for k in ks)
    assert abs(ks[-1] + 1.0) < 0.02
    for r in rows:
        assert abs(r["K_measured"] - r["K_expected"]) < 5e-3


def test_expected_image_curvature(spec1, spec2):
    assert vf.expected_image_curvature(spec1) == -1.0
    assert vf.expected_image_curvature(spec2) == pytest.approx(-4.0 / 3.0)


def test_sweep_deterministic():
    a = vf.sweep_image_curvature((1.5, 2.0), n=65)
    b = vf.sweep_image_curvature((1.5, 2.0), n=65)
    assert json.dumps(a.to_dict(), sort_keys=True) == \
        json.dumps(b.to_dict(), sort_keys=True)


def test_tight_tolerance_fails_honestly(spec2_small):
    # a curvature tolerance below the FD error floor must be reported as a
    # failure, not absorbed
    tols = vf.Tolerances(curvature=1e-6)
    report = vf.verify_example(spec2_small, tols=tols)
    assert not report.passed
    assert "image-curvature" in report.failed_names()
