import json

import numpy as np
import pytest

import cp3.potentials
from cp3.kernels import potential_tensor_resonant
from cp3.verify import (
    CHECKS,
    SLOW,
    VerificationSettings,
    random_triangle,
    run_verification_suite,
    scalar_rel,
    sign_changes,
    tensor_rel,
    triangle_345,
)

FAST = ["coupling_tensor_explicit_bracket", "sign_bracket_cyclic_cancellation", "degenerate_guards"]


def test_report_structure():
    report = run_verification_suite(only=FAST)
    assert set(report) == {"version", "settings", "checks", "passed", "failed", "seconds"}
    assert [c["name"] for c in report["checks"]] == FAST
    assert report["passed"] and report["failed"] == []
    for c in report["checks"]:
        assert set(c) == {"name", "criterion", "passed", "measured", "tolerance", "seconds", "details"}
        assert c["seconds"] >= 0
    json.dumps(report)


def test_check_names_unique_and_criteria_covered():
    names = [c[0] for c in CHECKS]
    assert len(names) == len(set(names))
    assert {c[1] for c in CHECKS if c[1] is not None} == set(range(1, 10))
    assert SLOW <= set(names)


def test_box_skipped_when_disabled():
    report = run_verification_suite(VerificationSettings(include_box=False), only=["box_mode_sum_normalization"])
    assert report["checks"] == []


def test_deterministic_measurements():
    a = run_verification_suite(only=["cyclic_relabeling_invariance"])
    b = run_verification_suite(only=["cyclic_relabeling_invariance"])
    assert a["checks"][0]["measured"] == b["checks"][0]["measured"]


def test_seed_changes_draws():
    a = run_verification_suite(only=["static_scaling_law"])
    b = run_verification_suite(VerificationSettings(seed=7), only=["static_scaling_law"])
    assert a["settings"]["seed"] != b["settings"]["seed"]
    assert a["checks"][0]["passed"] and b["checks"][0]["passed"]


def test_sabotaged_sign_is_caught(monkeypatch):
    monkeypatch.setattr(cp3.potentials, "potential_tensor_resonant", lambda k0, c: -potential_tensor_resonant(k0, c))
    report = run_verification_suite(only=["symmetrized_vs_closed_potential", "resonant_pair_vs_closed"])
    assert not report["passed"]
    assert set(report["failed"]) == {"symmetrized_vs_closed_potential", "resonant_pair_vs_closed"}


def test_computation_errors_become_failures(monkeypatch):
    from cp3 import verify
    from cp3.errors import NoConvergence

    def broken(rng, settings):
        raise NoConvergence("forced")

    monkeypatch.setattr(verify, "CHECKS", [("forced", None, broken, 1.0)])
    report = verify.run_verification_suite()
    assert report["failed"] == ["forced"]
    assert report["checks"][0]["measured"] == "nan"
    assert "NoConvergence" in report["checks"][0]["details"]["error"]


def test_helpers(rng):
    assert sign_changes([1, -1, 0, -2, 3]) == 2
    assert tensor_rel(np.eye(3) * 1.01, np.eye(3)) == pytest.approx(0.01)
    assert scalar_rel(2.0, 0.0) == 2.0
    assert scalar_rel(1.5, 1.0) == 0.5
    for _ in range(20):
        t = random_triangle(rng, 6.0)
        a, b, c = t.sides
        assert t.perimeter == pytest.approx(6.0)
        cosines = [(b * b + c * c - a * a) / (2 * b * c), (a * a + c * c - b * b) / (2 * a * c), (a * a + b * b - c * c) / (2 * a * b)]
        assert max(cosines) <= np.cos(np.radians(10.0)) + 1e-12
    assert triangle_345().sides == pytest.approx((3.0, 4.0, 5.0))
