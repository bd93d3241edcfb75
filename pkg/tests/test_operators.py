"""
Unit tests for the operator evaluators, pairings and the agreement matrix
"""

import math

import numpy as np
import pytest

from src.kernels.params import Params
from src.operators.agreement import AGREEMENT_CAP, EVALUATORS, agreement_matrix, evaluate_definition
from src.operators.bochner import op_balakrishnan, op_bochner
from src.operators.forms import check_form_adjoint, op_form, op_form_fourier, op_weak_pairing
from src.operators.fourier import op_fourier, op_fourier_grid
from src.operators.riesz import check_potential_generator, check_riesz_inversion, op_riesz_potential
from src.operators.semigroup import harmonic_value, op_harmonic, op_semigroup, semigroup_value
from src.operators.settings import EvalSettings
from src.operators.singular import (
    check_maximum_principle,
    op_dynkin,
    op_singular,
    op_singular_compensated,
    op_singular_symmetrized,
    singular_partial_values,
)
from src.operators.types import EvalReport
from src.testbank.bank import abs_power, harmonic_polynomial, path_i_not_d, path_s_not_i
from src.testbank.functions import (
    DecayClass,
    TestFunction,
    dilated,
    gaussian_lf,
    linear_combination,
    make_bump,
    make_constant,
    make_gaussian,
    make_rational,
    translated,
)
from src.operators.types import EvalReport
from src.utils.errors import AdmissibilityError, AliasingError, DomainError, UnsupportedError

GAUSSIAN_LF0 = -2.0 / math.sqrt(math.pi)


@pytest.fixture
def params():
    return Params(1, 1.0)


@pytest.fixture
def gaussian(params):
    return make_gaussian(params)


@pytest.mark.parametrize("evaluator,tolerance", [
    (op_fourier, 1e-8),
    (op_singular, 1e-6),
    (op_singular_compensated, 1e-6),
    (op_singular_symmetrized, 1e-8),
    (op_dynkin, 1e-6),
    (op_semigroup, 1e-5),
    (op_harmonic, 1e-5),
    (op_bochner, 1e-6),
    (op_balakrishnan, 1e-5),
])
def test_gaussian_master_value(params, gaussian, evaluator, tolerance):
    """Test every definition against -2/sqrt(pi) for the Gaussian at 0."""
    report = evaluator(params, gaussian, [0.0])
    assert report.converged
    assert report.value == pytest.approx(GAUSSIAN_LF0, abs=tolerance)


OFF_CENTRE = {1: [0.4], 2: [0.3, 0.3], 3: [0.3, -0.2, 0.1]}


@pytest.mark.parametrize("evaluator", [
    op_fourier, op_singular, op_singular_symmetrized, op_dynkin, op_semigroup, op_harmonic, op_bochner,
])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_gaussian_off_centre(d, alpha, evaluator):
    """Test each definition against the closed form of L e^{-|x|^2} away from the centre."""
    p = Params(d, alpha)
    x = OFF_CENTRE[d]
    report = evaluator(p, make_gaussian(p), x)
    assert report.converged
    assert report.value == pytest.approx(gaussian_lf(p, x), abs=1e-4)


@pytest.mark.parametrize("d,alpha,x,exact", [
    (2, 1.0, [0.3, 0.3], -1.34414),
    (1, 0.5, [0.4], -0.76375),
])
def test_semigroup_and_harmonic_keep_far_tail(d, alpha, x, exact):
    """Test S and H include the slowly decaying kernel tail for alpha <= 1."""
    p = Params(d, alpha)
    gaussian = make_gaussian(p)
    assert gaussian_lf(p, x) == pytest.approx(exact, abs=1e-5)
    for evaluator in (op_semigroup, op_harmonic):
        report = evaluator(p, gaussian, x)
        assert report.converged
        assert report.value == pytest.approx(gaussian_lf(p, x), abs=1e-5)


def test_fourier_rejects_non_finite_inversion(params, gaussian, mocker):
    """Test a non-finite inversion is reported as not converged with infinite error."""
    mocker.patch("src.operators.fourier.radial_fourier_inverse",
                 side_effect=[(-5.7e307 * 10.0, 1e-3), (1.2, 1e-12)])
    report = op_fourier(params, gaussian, [0.7])
    assert not report.converged
    assert report.error_estimate == math.inf


def test_fourier_rejects_value_beyond_absolute_bound(params, gaussian, mocker):
    """Test |L f(x)| above (2 pi)^{-d} int |xi|^alpha |F f| marks the report unconverged."""
    mocker.patch("src.operators.fourier.radial_fourier_inverse",
                 side_effect=[(5.0, 1e-12), (1.2, 1e-12)])
    report = op_fourier(params, gaussian, [0.7])
    assert not report.converged
    assert report.diagnostics["out_of_range"]
    assert report.error_estimate >= 5.0 - 1.2


@pytest.mark.parametrize("evaluator", [
    op_singular, op_singular_compensated, op_singular_symmetrized, op_dynkin,
    op_semigroup, op_harmonic, op_bochner, op_balakrishnan,
])
def test_constant_is_annihilated(params, evaluator):
    """Test constants give 0 under every kernel definition."""
    report = evaluator(params, make_constant(params, 2.5), [0.4])
    assert report.value == pytest.approx(0.0, abs=1e-12)


def test_odd_function_at_centre(params):
    """Test the principal value of an odd function vanishes at its centre."""
    odd = TestFunction(
        name="odd", d=1, evaluator=lambda x: x[..., 0] * np.exp(-x[..., 0] ** 2),
        decay=DecayClass("schwartz"), support_radius=7.0,
    )
    assert op_singular(params, odd, [0.0]).value == pytest.approx(0.0, abs=1e-10)


def test_fourier_refuses_without_profile(params):
    """Test F needs a radial Fourier profile."""
    with pytest.raises(AdmissibilityError):
        op_fourier(params, make_constant(params), [0.0])


def test_singular_refuses_wrong_dimension(params):
    """Test a function of another dimension is rejected."""
    with pytest.raises(DomainError):
        op_singular(params, make_gaussian(Params(2, 1.0)), [0.0])


def test_harmonic_polynomial_bochner_and_semigroup():
    """Test B annihilates x1^2 - x2^2 while S refuses it."""
    params = Params(2, 1.0)
    f = harmonic_polynomial(params)
    assert op_bochner(params, f, [1.0, 2.0]).value == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(AdmissibilityError):
        op_semigroup(params, f, [1.0, 2.0])


def test_abs_power_dynkin_zero():
    """Test |x|^{alpha-1} is annihilated by the Dynkin operator at x=0.5."""
    params = Params(1, 1.5)
    report = op_dynkin(params, abs_power(params), [0.5])
    assert report.value == pytest.approx(0.0, abs=1e-4)


def test_principal_value_without_dynkin_limit(params):
    """Test the shell series: I converges at 0, D does not."""
    f = path_i_not_d(params)
    assert op_singular(params, f, [0.0]).converged
    dynkin = op_dynkin(params, f, [0.0])
    assert not dynkin.converged
    assert dynkin.value == math.inf
    assert dynkin.error_estimate == math.inf
    assert dynkin.diagnostics["divergent"]
    assert len(dynkin.diagnostics["failed_scales"]) >= 7


def test_principal_value_partials_grow_without_bound(params):
    """Test the double-shell series adds a fixed amount per halving of r."""
    values = np.array(singular_partial_values(params, path_s_not_i(params), [0.0])["values"])
    steps = np.diff(values)
    assert len(steps) >= 6
    assert np.all(steps > 0)
    assert steps[1:] == pytest.approx(np.full(len(steps) - 1, steps[1]), rel=0.1)
    assert values[-1] > 5.0


def test_semigroup_without_principal_value(params):
    """Test the double-shell series: S converges to 0, I does not settle."""
    f = path_s_not_i(params)
    semigroup = op_semigroup(params, f, [0.0])
    assert semigroup.converged
    assert semigroup.value == pytest.approx(0.0, abs=1e-6)
    assert not op_singular(params, f, [0.0]).converged


def test_harmonic_equals_semigroup_at_alpha_one(params, gaussian):
    """Test q_y = p_y at alpha = 1 scale by scale."""
    for scale in (1.0, 0.25, 0.0625):
        s = semigroup_value(params, gaussian, [0.3], scale)["value"]
        h = harmonic_value(params, gaussian, [0.3], scale)["value"]
        assert h == pytest.approx(s, abs=1e-9)


def test_compensated_matches_singular():
    """Test the compensated and plain integrals agree on 1/(1+x^2)."""
    params = Params(1, 1.2)
    f = make_rational(params, "cauchy", 1.0)
    plain = op_singular(params, f, [0.7])
    compensated = op_singular_compensated(params, f, [0.7])
    assert compensated.diagnostics["gradient_source"] == "analytic"
    assert abs(plain.value - compensated.value) <= plain.error_estimate + compensated.error_estimate + 1e-8


def test_symmetrized_matches_singular_in_2d():
    """Test the symmetrized and plain integrals agree for the 2D Gaussian."""
    params = Params(2, 1.0)
    f = make_gaussian(params)
    plain = op_singular(params, f, [0.5, 0.0])
    symmetric = op_singular_symmetrized(params, f, [0.5, 0.0])
    assert abs(plain.value - symmetric.value) <= plain.error_estimate + symmetric.error_estimate + 1e-8


def test_balakrishnan_matches_bochner():
    """Test BB and B agree on 1/(1+x^2) at alpha = 0.5."""
    params = Params(1, 0.5)
    f = make_rational(params, "cauchy", 1.0)
    bochner = op_bochner(params, f, [0.0])
    balakrishnan = op_balakrishnan(params, f, [0.0])
    assert abs(bochner.value - balakrishnan.value) <= bochner.error_estimate + balakrishnan.error_estimate + 1e-6
    assert bochner.value == pytest.approx(f.oracle(np.zeros(1)), abs=1e-5)


def test_fourier_grid_matches_pointwise(params, gaussian):
    """Test the FFT grid against radial inversion on a 2048-node box."""
    grid = op_fourier_grid(params, gaussian, box=20.0, n=2048)
    assert not grid.aliased
    assert grid.value_at([0.0]) == pytest.approx(op_fourier(params, gaussian, [0.0]).value, abs=1e-8)


def test_fourier_grid_matches_singular_in_2d():
    """Test the 2D grid value at a node against the principal value."""
    params = Params(2, 1.5)
    f = make_gaussian(params)
    grid = op_fourier_grid(params, f, box=8.0, n=128)
    reference = op_singular(params, f, [0.5, 0.5])
    assert grid.value_at([0.5, 0.5]) == pytest.approx(reference.value, abs=1e-5)


def test_fourier_grid_aliasing(params):
    """Test an under-resolved grid is flagged, and raises in strict mode."""
    narrow = make_gaussian(params, name="narrow", scale=8.0)
    assert op_fourier_grid(params, narrow, box=4.0, n=32).aliased
    with pytest.raises(AliasingError):
        op_fourier_grid(params, narrow, box=4.0, n=32, strict=True)


def test_fourier_grid_refuses_power_decay(params):
    """Test the grid needs Schwartz or compact functions."""
    with pytest.raises(AdmissibilityError):
        op_fourier_grid(params, make_rational(params, "cauchy", 1.0))


def test_zero_function_grid(params):
    """Test the grid of f = 0 is 0."""
    zero = TestFunction(name="zero", d=1, evaluator=lambda x: np.zeros(np.asarray(x).shape[:-1]),
                        decay=DecayClass("compact", 1.0), support_radius=1.0)
    grid = op_fourier_grid(params, zero, box=4.0, n=64)
    assert np.all(grid.values == 0.0)


def test_weak_pairing_gaussians(params, gaussian):
    """Test int (L f) phi = int f (L phi) for two Gaussians."""
    phi = make_gaussian(params, name="phi", center=np.array([0.3]))
    row = op_weak_pairing(params, gaussian, phi)
    assert row["residual"] <= 1e-5


def test_weak_pairing_self(params, gaussian):
    """Test the pairing of f with itself has no residual."""
    assert op_weak_pairing(params, gaussian, gaussian)["residual"] <= 1e-10


def test_weak_pairing_disjoint_bumps(params):
    """Test disjoint bumps reduce to the direct cross integral."""
    f = make_bump(params)
    phi = make_bump(params, name="far_bump", center=np.array([3.0]))
    row = op_weak_pairing(params, f, phi)
    assert row["cross_term"] > 0
    assert row["cross_residual"] <= 1e-6
    assert row["residual"] <= 1e-6


def test_form_real_and_fourier_sides(params, gaussian):
    """Test E(f, f) = 1 for the Gaussian at alpha = 1 on both sides."""
    real = op_form(params, gaussian, gaussian)
    fourier = op_form_fourier(params, gaussian, gaussian)
    assert real["value"] >= 0
    assert fourier["value"] == pytest.approx(1.0, abs=1e-8)
    assert real["value"] == pytest.approx(fourier["value"], abs=1e-6)


def test_form_adjoint(params, gaussian):
    """Test int (L f) g = -E(f, g) for shifted Gaussians."""
    g = make_gaussian(params, name="g", center=np.array([0.3]))
    assert check_form_adjoint(params, gaussian, g)["residual"] <= 1e-5


def test_riesz_requires_alpha_below_d(params, gaussian):
    """Test the Riesz potential is unsupported for alpha >= d."""
    with pytest.raises(UnsupportedError):
        op_riesz_potential(params, gaussian, [0.0])


def test_riesz_potential_of_zero():
    """Test I_alpha 0 = 0."""
    params = Params(2, 1.0)
    zero = TestFunction(name="zero", d=2, evaluator=lambda x: np.zeros(np.asarray(x).shape[:-1]),
                        decay=DecayClass("compact", 1.0), support_radius=1.0)
    assert op_riesz_potential(params, zero, [0.0, 0.0])["value"] == 0.0


def test_riesz_inversion_gaussian_2d():
    """Test I_alpha(L f) = -f for the 2D Gaussian at the origin."""
    params = Params(2, 1.0)
    assert check_riesz_inversion(params, make_gaussian(params), [0.0, 0.0])["residual"] <= 1e-4


def test_riesz_inversion_rational_1d():
    """Test I_alpha(L f) = -f for (1+x^2)^{-2} at alpha = 0.5."""
    params = Params(1, 0.5)
    f = make_rational(params, "rational_sq", 2.0)
    assert check_riesz_inversion(params, f, [0.3])["residual"] <= 1e-4


def test_potential_generator():
    """Test L_D I_alpha g = -g for the 3D Gaussian."""
    params = Params(3, 1.0)
    row = check_potential_generator(params, make_gaussian(params), [0.2, 0.0, 0.0])
    assert row["residual"] <= 1e-3


def test_agreement_matrix_gaussian(params, gaussian):
    """Test all definitions agree for the Gaussian with R skipped at alpha = d."""
    matrix = agreement_matrix(params, gaussian, [0.0])
    assert matrix.entries["R"].skipped
    assert matrix.passed
    for entry in matrix.entries.values():
        if entry.report is not None:
            assert entry.report.value == pytest.approx(GAUSSIAN_LF0, abs=1e-4)
    assert matrix.to_dict()["passed"]


def test_agreement_matrix_constant(params):
    """Test the constant gives 0 wherever it is admitted."""
    matrix = agreement_matrix(params, make_constant(params), [0.0], definitions=["I", "Ibar", "S", "B", "F"])
    assert matrix.entries["F"].skipped
    for tag in ("I", "I-compensated", "S", "B"):
        assert matrix.entries[tag].report.value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("d,alpha,x", [(2, 1.0, [0.2, 0.1]), (3, 1.5, [0.1, 0.0, -0.2])])
def test_agreement_matrix_higher_dimensions(d, alpha, x):
    """Test the matrix passes in 2D and 3D with the Riesz definition admitted."""
    p = Params(d, alpha)
    matrix = agreement_matrix(p, make_gaussian(p), x)
    assert not matrix.entries["R"].skipped
    assert matrix.passed
    assert all(pair["bound"] <= AGREEMENT_CAP for pair in matrix.pairs)


def test_agreement_bound_is_capped(params, gaussian, mocker):
    """Test large error estimates cannot make distant values agree."""
    mocker.patch.dict(EVALUATORS, {
        "I": lambda *args: EvalReport(1.0, 0.5, "I"),
        "S": lambda *args: EvalReport(1.2, 0.5, "S"),
    })
    matrix = agreement_matrix(params, gaussian, [0.0], definitions=["I", "S"])
    (pair,) = matrix.pairs
    assert pair["bound"] == AGREEMENT_CAP
    assert not pair["passed"]


def test_agreement_fails_pair_with_unconverged_side(params, gaussian, mocker):
    """Test equal values still fail when one side did not converge."""
    mocker.patch.dict(EVALUATORS, {
        "I": lambda *args: EvalReport(1.0, 1e-9, "I"),
        "S": lambda *args: EvalReport(1.0, 1e-9, "S", converged=False),
    })
    matrix = agreement_matrix(params, gaussian, [0.0], definitions=["I", "S"])
    assert not matrix.pairs[0]["passed"]
    assert not matrix.passed


def test_agreement_matrix_unknown_tag(params, gaussian):
    """Test unknown tags are rejected."""
    with pytest.raises(DomainError):
        agreement_matrix(params, gaussian, [0.0], definitions=["Z"])
    with pytest.raises(DomainError):
        evaluate_definition(params, gaussian, [0.0], "W")


def test_linearity(params, gaussian):
    """Test op(a f + b g) = a op(f) + b op(g)."""
    g = make_gaussian(params, name="g", center=np.array([0.3]))
    combo = linear_combination(gaussian, g, 2.0, -0.5)
    x = [0.1]
    lhs = op_singular_symmetrized(params, combo, x)
    rf = op_singular_symmetrized(params, gaussian, x)
    rg = op_singular_symmetrized(params, g, x)
    bound = lhs.error_estimate + 2.0 * rf.error_estimate + 0.5 * rg.error_estimate + 1e-8
    assert abs(lhs.value - (2.0 * rf.value - 0.5 * rg.value)) <= bound


def test_translation_covariance(params, gaussian):
    """Test op(f(. - v))(x + v) = op(f)(x)."""
    shifted = translated(gaussian, [0.7])
    a = op_singular(params, shifted, [0.9])
    b = op_singular(params, gaussian, [0.2])
    assert abs(a.value - b.value) <= a.error_estimate + b.error_estimate + 1e-8


def test_scaling_covariance(params, gaussian):
    """Test op(f(c .))(x) = c^alpha op(f)(c x)."""
    scaled = dilated(gaussian, 2.0, params.alpha)
    a = op_semigroup(params, scaled, [0.1])
    b = op_semigroup(params, gaussian, [0.2])
    assert abs(a.value - 2.0 * b.value) <= a.error_estimate + 2.0 * b.error_estimate + 1e-5


def test_maximum_principle(params, gaussian):
    """Test L f <= 0 at the global maximum of the Gaussian."""
    row = check_maximum_principle(params, gaussian, [0.0])
    assert row["passed"]
    assert row["value"] < 0


def test_settings_overrides():
    """Test overrides and ladder construction."""
    settings = EvalSettings().with_overrides(r0=0.5, singular_steps=4, abs_tol=None)
    assert settings.singular_ladder() == [0.5, 0.25, 0.125, 0.0625, 0.03125]
    assert settings.abs_tol == 1e-8
    with pytest.raises(DomainError):
        EvalSettings().with_overrides(bogus=1)
    with pytest.raises(DomainError):
        EvalSettings(semigroup_steps=2)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
