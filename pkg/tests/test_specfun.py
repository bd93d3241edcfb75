"""
Unit tests for the special-function kernel
"""

import math
import warnings

import numpy as np
import pytest
from scipy import integrate, special

from src.specfun.gamma import gamma, log_gamma, rgamma, log_abs_gamma, gamma_sign
from src.specfun.bessel import bessel_k
from src.specfun.hypergeometric import hyp2f1, hyp2f1_series
from src.utils.errors import DomainError, PoleError


def test_gamma_classical_values():
    """Test gamma at half-integers and one."""
    assert gamma(0.5) == pytest.approx(1.7724538509055160, rel=1e-13)
    assert gamma(1.0) == pytest.approx(1.0, rel=1e-13)
    assert gamma(-0.5) == pytest.approx(-3.5449077018110320, rel=1e-13)


def test_gamma_matches_scipy_on_range():
    """Test gamma relative accuracy for |x| <= 30."""
    rng = np.random.default_rng(11)
    xs = rng.uniform(-30, 30, size=400)
    xs = xs[np.abs(xs - np.round(xs)) > 1e-3]
    values = gamma(xs)
    assert np.allclose(values, special.gamma(xs), rtol=1e-12, atol=0)


def test_gamma_reflection():
    """Test Gamma(x)Gamma(1-x)sin(pi x)/pi = 1."""
    for x in [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9]:
        assert gamma(x) * gamma(1 - x) * math.sin(math.pi * x) / math.pi == pytest.approx(1.0, abs=1e-12)


def test_gamma_recurrence():
    """Test Gamma(x+1) = x Gamma(x) on random non-integers."""
    rng = np.random.default_rng(3)
    xs = rng.uniform(-5, 5, size=200)
    xs = xs[np.abs(xs - np.round(xs)) > 1e-2]
    lhs = gamma(xs + 1.0)
    rhs = xs * gamma(xs)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)


def test_gamma_poles():
    """Test pole error at non-positive integers."""
    for x in [0.0, -1.0, -7.0]:
        with pytest.raises(PoleError):
            gamma(x)
    assert rgamma(-2.0) == 0.0
    assert rgamma(3.0) == pytest.approx(0.5)


def test_gamma_array_shape():
    """Test array input keeps its shape."""
    xs = np.array([[0.5, 1.5], [2.5, 3.5]])
    assert gamma(xs).shape == (2, 2)


def test_scalar_input_returns_plain_float():
    """Test scalar arguments come back as float without numpy conversion warnings."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", DeprecationWarning)
        for func in (gamma, rgamma, log_gamma):
            value = func(2.5)
            assert type(value) is float
        assert type(gamma(np.float64(-0.5))) is float


def test_log_gamma_values():
    """Test log_gamma reference values."""
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(0.5) == pytest.approx(0.5723649429247001, rel=1e-13)
    assert log_gamma(10.0) == pytest.approx(12.801827480081469, rel=1e-13)
    assert log_gamma(0.01) == pytest.approx(special.gammaln(0.01), rel=1e-13)


def test_log_gamma_domain():
    """Test log_gamma refuses non-positive input."""
    with pytest.raises(DomainError):
        log_gamma(0.0)
    with pytest.raises(DomainError):
        log_gamma(-1.5)


def test_log_abs_gamma_negative():
    """Test ln|Gamma| and sign for negative arguments."""
    assert log_abs_gamma(-0.5) == pytest.approx(math.log(2 * math.sqrt(math.pi)), rel=1e-13)
    assert gamma_sign(-0.5) == -1.0
    assert gamma_sign(-1.5) == 1.0
    assert gamma_sign(2.0) == 1.0


def test_bessel_k_half_integer():
    """Test K_{1/2} closed form."""
    assert bessel_k(0.5, 1.0) == pytest.approx(0.4610685044478946, rel=1e-12)
    assert bessel_k(0.5, 2.0) == pytest.approx(0.1199377719680614, rel=1e-12)
    assert bessel_k(1.5, 3.0) == pytest.approx(
        math.sqrt(math.pi / 6.0) * math.exp(-3.0) * (1 + 1 / 3.0), rel=1e-12
    )


def test_bessel_k_small_x_leading_term():
    """Test small-x behaviour K_nu(x) ~ Gamma(nu)/2 (x/2)^{-nu}."""
    x = 1e-5
    ratio = bessel_k(0.75, x) * (x / 2) ** 0.75 / (0.5 * gamma(0.75))
    assert ratio == pytest.approx(1.0, abs=1e-4)


def test_bessel_k_matches_scipy():
    """Test K_nu against scipy.special.kv on [1e-6, 50]."""
    xs = np.geomspace(1e-6, 50, 60)
    for nu in [0.0, 0.25, 0.5, 0.75, 1.0, 1.3, 2.0]:
        expected = special.kv(nu, xs)
        assert np.allclose(bessel_k(nu, xs), expected, rtol=1e-10, atol=0)


def test_bessel_k_order_symmetry():
    """Test K_{-nu} = K_nu."""
    assert bessel_k(-0.3, 1.7) == bessel_k(0.3, 1.7)


def test_bessel_k_seam_continuity():
    """Test continuity across the series/continued-fraction seam."""
    for nu in [0.0, 0.4, 1.25]:
        below = bessel_k(nu, 2.0)
        above = bessel_k(nu, 2.0 + 1e-12)
        assert above == pytest.approx(below, rel=1e-10)


def test_bessel_k_domain():
    """Test domain error at x <= 0."""
    with pytest.raises(DomainError):
        bessel_k(0.5, 0.0)


def test_hyp2f1_closed_forms():
    """Test 2F1 closed forms."""
    assert hyp2f1(0.7, 0.3, 1.1, 0.0) == 1.0
    assert hyp2f1(1, 1, 2, 0.5) == pytest.approx(1.3862943611198906, rel=1e-12)
    assert hyp2f1(0.5, 0.5, 1.5, -1.0) == pytest.approx(0.8813735870195430, rel=1e-12)


def test_hyp2f1_arsinh_identity_uses_three_halves():
    """Test 2F1(1/2,1/2;3/2;-z^2) = arsinh(z)/z and that third parameter 1 differs."""
    for zz in [0.3, 1.0, 2.5, 7.0]:
        assert hyp2f1(0.5, 0.5, 1.5, -zz * zz) == pytest.approx(math.asinh(zz) / zz, rel=1e-10)
    assert abs(hyp2f1(0.5, 0.5, 1.0, -1.0) - math.asinh(1.0)) > 1e-3


def _euler_integral(a, b, c, z):
    """Euler integral representation of 2F1, valid for c > b > 0."""
    value, _ = integrate.quad(
        lambda t: (1.0 - z * t) ** (-a), 0.0, 1.0,
        weight='alg', wvar=(b - 1.0, c - b - 1.0), epsabs=0.0, epsrel=1e-13, limit=200,
    )
    return value * special.gamma(c) / (special.gamma(b) * special.gamma(c - b))


def test_hyp2f1_negative_arguments_against_euler_integral():
    """Test 2F1 on the negative-argument ranges used by ball-kernel formulas."""
    rng = np.random.default_rng(5)
    for _ in range(40):
        a = rng.uniform(0, 3)
        b = rng.uniform(0.2, 2.5)
        c = b + rng.uniform(0.2, 1.5)
        z = -rng.uniform(0, 60)
        assert hyp2f1(a, b, c, z) == pytest.approx(_euler_integral(a, b, c, z), rel=1e-9)


def test_hyp2f1_positive_arguments():
    """Test 2F1 on (0, 1), including the connection-formula range."""
    for z in [0.3, 0.6, 0.85, 0.95, 0.99]:
        assert hyp2f1(0.3, 0.8, 1.7, z) == pytest.approx(special.hyp2f1(0.3, 0.8, 1.7, z), rel=1e-9)


def test_hyp2f1_series_agrees_small_argument():
    """Test transformed evaluation against direct series for |z| < 0.5."""
    assert hyp2f1(1.2, 0.4, 2.3, -0.45) == pytest.approx(hyp2f1_series(1.2, 0.4, 2.3, -0.45), rel=1e-12)


def test_hyp2f1_errors():
    """Test pole and domain errors."""
    with pytest.raises(PoleError):
        hyp2f1(1, 1, -2, 0.1)
    with pytest.raises(DomainError):
        hyp2f1(1, 1, 2, 1.0)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
