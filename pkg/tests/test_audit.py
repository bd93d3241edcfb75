"""
Unit tests for the identity audit engine and the complete-monotonicity probe
"""

import math

import pytest

from src.audit.conjecture_probe import derivatives, probe_conjecture_cm, probe_location
from src.audit.identity_audit import DEFAULT_GRID, IdentityAudit, audit_row
from src.kernels.params import Params
from src.utils.errors import DomainError, QuadratureError


@pytest.fixture(scope="module")
def cauchy_audit():
    """Full audit for d=1, alpha=1 (run once for the module)."""
    return IdentityAudit(Params(1, 1.0)).run()


def test_audit_row_pass_and_fail():
    """Test rows pass iff the residual is finite and within tolerance."""
    assert audit_row("x", 1e-9, 1e-8)["passed"] is True
    assert audit_row("x", 1e-7, 1e-8)["passed"] is False
    assert audit_row("x", math.nan, 1e-8)["passed"] is False


def test_informational_rows_have_no_verdict():
    """Test informational rows carry passed=None and extra values."""
    row = audit_row("resolvent_display", 0.5, 1e-10, informational=True, measured_factor=1.5)
    assert row["passed"] is None
    assert row["informational"]
    assert row["measured_factor"] == 1.5


def test_audit_cauchy_all_rows_pass(cauchy_audit):
    """Test every non-informational row passes for d=1, alpha=1."""
    failed = [row["name"] for row in cauchy_audit["rows"] if row["passed"] is False]
    assert failed == []
    assert cauchy_audit["passed"]
    assert cauchy_audit["stats"]["errors"] == 0


def test_audit_cauchy_includes_closed_forms(cauchy_audit):
    """Test the alpha=1 closed-form row and the resolvent discrepancy row are present."""
    rows = {row["name"]: row for row in cauchy_audit["rows"]}
    assert "alpha1_closed_forms" in rows
    assert rows["resolvent_display"]["informational"]
    # d=1: the display differs from the symbol kernel by sqrt(s)
    assert rows["resolvent_display"]["measured_factor"] == pytest.approx(math.sqrt(DEFAULT_GRID["resolvent_s"]),
                                                                         rel=1e-6)


def test_audit_core_identities_present(cauchy_audit):
    """Test the ball identities each produce one row."""
    names = [row["name"] for row in cauchy_audit["rows"]]
    for name in ("poisson_normalization", "green_mass", "green_poisson_identity", "nu_mu_identity",
                 "gamma_pi_nu", "qy_fourier", "heat_limit", "m_prime_integral", "m_prime_asymptote"):
        assert names.count(name) == 1


def test_audit_counts_are_consistent(cauchy_audit):
    """Test stats add up to the number of rows."""
    stats = cauchy_audit["stats"]
    assert stats["rows"] == len(cauchy_audit["rows"])
    assert stats["passed"] + stats["failed"] + stats["informational"] == stats["rows"]


def test_audit_library_error_becomes_failed_row(mocker):
    """Test a FraclapError inside a check is reported as a failed row."""
    audit = IdentityAudit(Params(2, 0.5))
    mocker.patch.object(audit, "_qy_mass", side_effect=QuadratureError("budget exceeded"))

    row = audit._run_check("qy_mass", audit._qy_mass)

    assert row["passed"] is False
    assert "budget exceeded" in row["error"]
    assert audit.stats["errors"] == 1
    assert audit.stats["failed"] == 1


def test_audit_grid_overrides():
    """Test known grid keys are applied and unknown keys ignored."""
    audit = IdentityAudit(Params(1, 1.0), grid={"r": 2.0, "bogus": 1.0})
    assert audit.grid["r"] == 2.0
    assert "bogus" not in audit.grid


def test_probe_derivatives_of_known_function():
    """Test the contour derivatives reproduce phi and alternate in sign at r=1."""
    result = derivatives(1.5, 1.0, 4)
    values = result["values"]
    assert all((-1) ** n * values[n] > 0 for n in range(5))
    assert all(abs(values[n]) > result["noise"][n] for n in range(5))


def test_probe_is_consistent_for_alpha_1_5():
    """Test the probe finds alternating signs for alpha=1.5 up to order 6."""
    report = probe_conjecture_cm(1.5, orders=6, grid=61)
    assert report["status"] == "consistent"
    assert report["kind"] == "numerical probe, not a proof"
    assert probe_location(report) is None
    assert report["bessel_deviation"] < 1e-8


@pytest.mark.parametrize("kwargs", [
    {"alpha": 1.0},
    {"alpha": 2.0},
    {"alpha": 1.5, "orders": 9},
    {"alpha": 1.5, "orders": 0},
    {"alpha": 1.5, "grid": 1},
    {"alpha": 1.5, "r_min": 10.0, "r_max": 1.0},
])
def test_probe_rejects_bad_arguments(kwargs):
    """Test alpha outside (1, 2), orders outside 1..8 and bad grids are rejected."""
    with pytest.raises(DomainError):
        probe_conjecture_cm(**kwargs)


def test_probe_location_reports_first_violation():
    """Test the first violation is returned for reports that have one."""
    report = {"violations": [{"r": 2.0, "order": 3, "value": 1e-3, "noise": 1e-12}]}
    assert probe_location(report)["order"] == 3


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
