"""
Unit tests for scale-limit extrapolation
"""

import math

import numpy as np
import pytest

from src.operators.extrapolation import extrapolate, limit_weights, model_exponents, observed_order
from src.operators.types import ConvergenceTable, EvalReport
from src.utils.errors import DomainError, NonConvergenceError


def test_quadratic_model_with_hint():
    """Test exact data 3 + 2h^2 is extrapolated to 3 with order 2."""
    h = 2.0 ** -np.arange(11)
    table = extrapolate(h, 3.0 + 2.0 * h ** 2, order_hint=2.0)

    assert table.extrapolated == pytest.approx(3.0, abs=1e-10)
    assert table.order == 2.0
    assert table.converged
    assert table.model == "expansion"


def test_quadratic_model_without_hint():
    """Test the observed order is recovered when no hint is given."""
    h = 2.0 ** -np.arange(11)
    table = extrapolate(h, 3.0 + 2.0 * h ** 2)

    assert table.extrapolated == pytest.approx(3.0, abs=1e-10)
    assert table.order == pytest.approx(2.0, abs=1e-6)
    assert table.converged


def test_constant_table_is_flat():
    """Test constant data converges with an infinite order."""
    h = 2.0 ** -np.arange(6)
    table = extrapolate(h, np.full(6, 5.0))

    assert table.extrapolated == 5.0
    assert table.order == math.inf
    assert table.converged
    assert table.model == "flat"


def test_two_term_square_root_model():
    """Test 1 + h^0.5 + 0.01h on a quartering ladder."""
    h = 4.0 ** -np.arange(13)
    table = extrapolate(h, 1.0 + h ** 0.5 + 0.01 * h)

    assert table.extrapolated == pytest.approx(1.0, abs=1e-6)
    assert table.order == pytest.approx(0.5, abs=0.05)
    assert table.converged


def test_logarithmic_growth_is_divergent():
    """Test values growing like log(1/h) are flagged, not extrapolated."""
    k = np.arange(10)
    table = extrapolate(2.0 ** -k, k.astype(float))

    assert table.model == "divergent"
    assert not table.converged


def test_expansion_hint_ignored_for_rough_data():
    """Test a hint far from the observed order falls back to the data model."""
    h = 2.0 ** -np.arange(13)
    table = extrapolate(h, 2.0 - h ** 0.3, order_hint=(1.0, 3.0))

    assert table.model == "observed-order"
    assert table.extrapolated == pytest.approx(2.0, abs=1e-6)


def test_non_finite_values():
    """Test a table with nan values is not converged."""
    h = 2.0 ** -np.arange(5)
    table = extrapolate(h, [1.0, 2.0, math.nan, 3.0, 4.0])

    assert table.model == "non-finite"
    assert not table.converged


def test_too_few_scales():
    """Test fewer than four scales are rejected."""
    with pytest.raises(DomainError):
        extrapolate([1.0, 0.5, 0.25], [1.0, 1.0, 1.0])


def test_scales_must_decrease():
    """Test non-decreasing scales are rejected."""
    with pytest.raises(DomainError):
        ConvergenceTable([1.0, 0.5, 0.5, 0.25], [0.0] * 4)


def test_observed_order_exact():
    """Test the three-point order of C h^p on a geometric ladder."""
    h = 2.0 ** -np.arange(6)
    assert observed_order(h, 7.0 + h ** 1.5) == pytest.approx(1.5, abs=1e-10)
    assert math.isnan(observed_order(h, np.ones(6)))


def test_model_exponents():
    """Test the correction exponents of each definition."""
    assert model_exponents("I", 1.0) == (1.0, 3.0, 5.0)
    assert model_exponents("H", 1.0) == (1.0, 2.0, 3.0)
    assert model_exponents("D", 1.5) == (0.5, 2.0, 2.5)
    assert model_exponents("S", 0.5) == (1.0, 2.0, 3.0)
    with pytest.raises(DomainError):
        model_exponents("F", 1.0)


def test_limit_weights_reproduce_fit():
    """Test the weights give the expansion limit and sum to one."""
    h = 2.0 ** -np.arange(5)
    weights = limit_weights(h, (1.0, 2.0))
    assert weights.sum() == pytest.approx(1.0, abs=1e-10)
    assert weights @ (4.0 - 3.0 * h + h ** 2) == pytest.approx(4.0, abs=1e-10)


def test_report_raise_for_convergence():
    """Test non-converged reports raise with the report attached."""
    report = EvalReport(1.0, 0.1, "I", converged=False)
    with pytest.raises(NonConvergenceError) as info:
        report.raise_for_convergence()
    assert info.value.report is report
    assert EvalReport(1.0, 0.0, "S").raise_for_convergence().value == 1.0


def test_report_rejects_unknown_tag():
    """Test EvalReport validates its definition tag."""
    with pytest.raises(DomainError):
        EvalReport(0.0, 0.0, "X")
    assert EvalReport(0.0, math.nan, "F").error_estimate == math.inf


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
