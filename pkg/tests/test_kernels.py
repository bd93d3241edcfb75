"""
Unit tests for kernels, the stable density profile and the resolvent kernel
"""

import math

import numpy as np
import pytest
from scipy import integrate

from src.kernels.kernels import (
    eta_alpha1,
    heat_profile,
    kernel_heat,
    kernel_nu,
    kernel_nu_tilde,
    kernel_qy,
    kernel_resolvent_laplacian,
    phi_lambda,
    resolvent_kernel_as_displayed,
    resolvent_profile,
)
from src.kernels.params import Params, c_dalpha
from src.kernels.profiles import (
    harmonic_profile_consistency,
    heat_limit_check,
    m_prime_asymptote,
    m_prime_asymptote_as_displayed,
    m_prime_integral,
    profile_m,
    pt_two_sided_ratio,
    qy_fourier_check,
    qy_mass,
    small_time_check,
)
from src.kernels.radial import radial_quad, sphere_rule, spherical_sum
from src.kernels.resolvent import bound_check_u1, kernel_u_lambda
from src.kernels.stable_density import (
    kernel_pt,
    load_cached_values,
    p1_fourier_inversion,
    save_cached_values,
    build_p1_profile,
)
from src.utils.errors import DomainError, UnsupportedError


def test_params_constants():
    """Test c_{d,alpha} and c_alpha at alpha = 1."""
    p = Params(1, 1.0)
    assert p.c_dalpha == pytest.approx(1.0 / math.pi, rel=1e-13)
    assert p.c_alpha == pytest.approx(1.0, rel=1e-13)
    assert Params(2, 1.0).c_dalpha == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-13)


def test_params_validation():
    """Test invalid dimension and alpha are rejected."""
    with pytest.raises(DomainError):
        Params(4, 1.0)
    with pytest.raises(DomainError):
        Params(1, 2.0)
    with pytest.raises(DomainError):
        Params(1, 0.0)
    with pytest.raises(DomainError):
        Params(1, 1.5).riesz_constant
    with pytest.raises(DomainError):
        c_dalpha(1, -1.0)


def test_sphere_rule_weights():
    """Test angular weights sum to the sphere area and integrate x_3^2 exactly."""
    for d in (1, 2, 3):
        rule = sphere_rule(d)
        assert rule.weights.sum() == pytest.approx(Params(d, 1.0).sigma, rel=1e-13)
    rule = sphere_rule(3)
    assert np.sum(rule.weights * rule.directions[:, 2] ** 2) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-13)


def test_spherical_sum_vectorized():
    """Test spherical sum of a constant over an array of radii."""
    rule = sphere_rule(2)
    values = spherical_sum(lambda pts: np.ones(pts.shape[:-1]), np.zeros(2), np.array([0.5, 1.0, 2.0]), rule)
    assert values.shape == (3,)
    assert np.allclose(values, 2.0 * math.pi)


def test_radial_quad_segments_and_infinity():
    """Test segmented quadrature to infinity."""
    result = radial_quad(lambda r: math.exp(-r), 0.0, math.inf, breakpoints=[1.0, 5.0])
    assert result.ok
    assert result.value == pytest.approx(1.0, abs=1e-10)
    assert result.segments >= 3


def test_kernel_nu_examples():
    """Test nu and its cutoff."""
    assert kernel_nu(Params(1, 1.0), 1.0) == pytest.approx(0.3183098862, rel=1e-9)
    assert kernel_nu(Params(2, 1.0), np.array([1.0, 0.0])) == pytest.approx(0.1591549431, rel=1e-9)
    assert kernel_nu(Params(2, 0.7), np.array([0.5, 0.0]), r=1.0) == 0.0
    with pytest.raises(DomainError):
        kernel_nu(Params(1, 1.0), 0.0)


def test_kernel_nu_tilde_examples():
    """Test nu-tilde closed form, boundary value and domination of nu_r."""
    p = Params(1, 1.0)
    assert kernel_nu_tilde(p, 2.0, 1.0) == pytest.approx(0.09188814923, rel=1e-9)
    assert kernel_nu_tilde(p, 1.0, 1.0) == 0.0
    q = Params(3, 1.3)
    pts = np.random.default_rng(5).normal(size=(50, 3)) * 2.0
    assert np.all(kernel_nu_tilde(q, pts, 0.8) >= kernel_nu(q, pts, r=0.8))


def test_kernel_heat():
    """Test heat kernel values and mass."""
    assert kernel_heat(Params(1, 1.0), 0.0, 1.0) == pytest.approx(0.2820947918, rel=1e-9)
    assert kernel_heat(Params(2, 1.0), np.zeros(2), 0.25) == pytest.approx(1.0 / math.pi, rel=1e-12)
    mass, _ = integrate.quad(lambda z: heat_profile(1, z, 0.7), -np.inf, np.inf, epsabs=1e-13)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_kernel_pt_cauchy():
    """Test p_t for alpha = 1 against the Cauchy closed form."""
    p = Params(1, 1.0)
    assert kernel_pt(p, 0.0, 1.0) == pytest.approx(1.0 / math.pi, rel=1e-12)
    assert kernel_pt(p, 1.0, 2.0) == pytest.approx(0.1273239545, rel=1e-9)


def test_kernel_pt_scaling_against_inversion():
    """Test p_2 from the profile against an independent inversion of p_1."""
    p = Params(1, 1.5)
    z = 1.3
    scaled = 2.0 ** (-1.0 / 1.5) * z
    direct, _ = p1_fourier_inversion(p, scaled)
    assert kernel_pt(p, z, 2.0) == pytest.approx(2.0 ** (-1.0 / 1.5) * direct, rel=1e-7)


def test_kernel_pt_mass_d1():
    """Test p_1 integrates to one."""
    p = Params(1, 1.5)
    profile_values = lambda r: kernel_pt(p, r, 1.0)
    result = radial_quad(profile_values, 0.0, math.inf, breakpoints=[1.0, 10.0, 50.0])
    assert 2.0 * result.value == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_pt_two_sided_bounds(alpha):
    """Test p_1 is comparable to min(1, |z|^{-d-alpha})."""
    report = pt_two_sided_ratio(Params(1, alpha))
    assert report["lower"] > 0
    assert np.isfinite(report["upper"])


def test_heat_limit_tail_constant():
    """Test rho^{d+alpha} p_1(rho) approaches c_{d,alpha}."""
    result = heat_limit_check(Params(1, 1.5))
    assert result["leading_residual"] < 0.02
    cauchy = heat_limit_check(Params(1, 1.0))
    assert cauchy["two_term_residual"] < 1e-3


def test_heat_limit_two_term_alpha_half():
    """Test the two-term expansion explains the slow tail for alpha = 0.5."""
    result = heat_limit_check(Params(1, 0.5))
    assert result["two_term_residual"] < 0.02
    assert result["two_term_residual"] < result["leading_residual"]


def test_small_time_limit():
    """Test p_t(z)/t approaches nu(z)."""
    assert small_time_check(Params(1, 1.0))["residual"] < 1e-3
    assert small_time_check(Params(1, 1.5))["residual"] < 1e-3


def test_kernel_qy_alpha_one():
    """Test q_y equals the Cauchy kernel when alpha = 1."""
    p = Params(1, 1.0)
    assert kernel_qy(p, 0.0, 1.0) == pytest.approx(1.0 / math.pi, rel=1e-12)
    assert kernel_qy(p, 0.7, 0.3) == pytest.approx(kernel_pt(p, 0.7, 0.3), rel=1e-12)


def test_kernel_qy_mass():
    """Test q_y integrates to one."""
    for d, alpha in [(1, 0.5), (2, 1.0), (3, 1.5)]:
        assert qy_mass(Params(d, alpha), 0.3) == pytest.approx(1.0, abs=1e-8)


def test_kernel_qy_fourier_inversion_at_origin():
    """Test q_1(0) against inverting phi_{s^2}(1) for d = 1, alpha = 0.5."""
    p = Params(1, 0.5)
    value, _ = integrate.quad(lambda s: phi_lambda(p, s * s, 1.0), 0.0, np.inf, epsabs=1e-12, limit=400)
    assert kernel_qy(p, 0.0, 1.0) == pytest.approx(value / math.pi, rel=1e-6)


def test_kernel_qy_fourier_check():
    """Test F q_y matches phi_{|xi|^2}(y)."""
    for d, alpha in [(1, 0.5), (2, 1.5), (3, 1.0)]:
        assert qy_fourier_check(Params(d, alpha), y=0.7)["max_residual"] < 1e-6


def test_harmonic_profile_closed_form():
    """Test the closed-form q_1 profile against kernel_qy."""
    assert harmonic_profile_consistency(Params(2, 0.8)) < 1e-12


def test_phi_lambda():
    """Test phi_lambda normalization, alpha = 1 closed form and slope."""
    assert phi_lambda(Params(1, 1.3), 2.0, 0.0) == 1.0
    assert phi_lambda(Params(1, 1.0), 4.0, 0.5) == pytest.approx(math.exp(-1.0), rel=1e-12)
    h = 1e-9
    slope = (phi_lambda(Params(1, 1.5), 1.0, h) - 1.0) / h
    assert slope == pytest.approx(-1.0, abs=1e-3)
    with pytest.raises(DomainError):
        phi_lambda(Params(1, 1.0), -1.0, 0.5)


def test_resolvent_examples():
    """Test resolvent kernel closed forms and mass 1/s."""
    assert kernel_resolvent_laplacian(Params(1, 1.0), 1.0, 1.0) == pytest.approx(math.exp(-1.0) / 2.0, rel=1e-12)
    assert kernel_resolvent_laplacian(Params(3, 1.0), np.array([0.5, 0.0, 0.0]), 4.0) == pytest.approx(
        0.05854983152, rel=1e-9
    )
    mass = radial_quad(lambda r: 2.0 * math.pi * r * float(resolvent_profile(2, r, 2.0)), 0.0, math.inf,
                       breakpoints=[1.0, 10.0])
    assert mass.value == pytest.approx(0.5, abs=1e-8)
    with pytest.raises(DomainError):
        kernel_resolvent_laplacian(Params(2, 1.0), np.zeros(2), 1.0)


@pytest.mark.parametrize("d", [1, 3])
def test_resolvent_display_factor(d):
    """Test the Bessel display differs from the symbol kernel by s^{1-d/2}."""
    s = 2.5
    x = np.zeros(d)
    x[0] = 0.8
    p = Params(d, 1.0)
    ratio = resolvent_kernel_as_displayed(p, x, s) / kernel_resolvent_laplacian(p, x, s)
    assert ratio == pytest.approx(s ** (1.0 - d / 2.0), rel=1e-10)


def test_eta_alpha1():
    """Test eta mass, Laplace transform and Bochner representation of p_1."""
    mass, _ = integrate.quad(eta_alpha1, 0.0, np.inf, epsabs=1e-13)
    assert mass == pytest.approx(1.0, abs=1e-10)
    laplace, _ = integrate.quad(lambda s: math.exp(-s) * eta_alpha1(s), 0.0, np.inf, epsabs=1e-13)
    assert laplace == pytest.approx(math.exp(-1.0), abs=1e-10)
    bochner, _ = integrate.quad(lambda s: heat_profile(1, 1.0, s) * eta_alpha1(s), 0.0, np.inf, epsabs=1e-13)
    assert bochner == pytest.approx(1.0 / (2.0 * math.pi), abs=1e-8)
    with pytest.raises(UnsupportedError):
        eta_alpha1(1.0, Params(1, 1.5))


def test_profile_m_integral_and_sign():
    """Test int m' = 1 and m' > 0 for the Cauchy profile."""
    p = Params(1, 1.0)
    assert m_prime_integral(p)["integral"] == pytest.approx(1.0, abs=1e-3)
    m = profile_m(p)
    grid = m.grid[1:]
    assert np.all(m.derivative(grid) > 0)
    assert m(0.0) == 0.0
    assert m(m.p1.rho_max) == pytest.approx(1.0, abs=1e-3)


def test_profile_m_asymptote():
    """Test r^{1+alpha} m'(r) at r = 40 against the derived constant."""
    p = Params(1, 1.5)
    m = profile_m(p)
    limit = m_prime_asymptote(p)
    assert limit < 0
    assert 40.0 ** 2.5 * m.derivative(40.0) == pytest.approx(limit, rel=0.05)
    displayed = m_prime_asymptote_as_displayed(p)
    assert limit / displayed == pytest.approx(-1.5 * math.sqrt(2.0 / math.pi), rel=1e-10)


def test_u_lambda_scaling():
    """Test u_lambda(x) = lambda^{(d-alpha)/alpha} u_1(lambda^{1/alpha} x)."""
    p = Params(1, 0.5)
    lhs = kernel_u_lambda(p, 1.0, 2.0)
    rhs = 2.0 ** (0.5 / 0.5) * kernel_u_lambda(p, 2.0 ** 2.0, 1.0)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_u_lambda_symmetry_and_domain():
    """Test u_lambda is even and rejects lambda <= 0."""
    p = Params(2, 1.0)
    assert kernel_u_lambda(p, np.array([0.4, -0.3]), 1.0) == pytest.approx(
        kernel_u_lambda(p, np.array([-0.4, 0.3]), 1.0), rel=1e-12
    )
    with pytest.raises(DomainError):
        kernel_u_lambda(p, np.array([1.0, 0.0]), 0.0)


def test_u1_bound_alpha_equals_d():
    """Test u_1 is bounded by the logarithmic shape when alpha = d = 1."""
    report = bound_check_u1(Params(1, 1.0), n=9)
    assert report["passed"]
    assert report["constant"] < 10.0


def test_profile_cache_roundtrip(tmp_path):
    """Test the on-disk profile table is reused only with a matching header."""
    p = Params(1, 1.0)
    profile = build_p1_profile(p, nodes=64)
    path = save_cached_values(tmp_path, profile, p)
    assert path.read_text().startswith("# fraclap-profile v1 d=1 alpha=1.0 nodes=64")
    values = load_cached_values(tmp_path, p, 64, profile.rho_max)
    assert np.allclose(values, profile.values, rtol=1e-15)
    assert load_cached_values(tmp_path, p, 64, 40.0) is None


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
