"""
The profile m(r) = c_{d,alpha}^{-1} r^{d+alpha} p_1(r) with its derivative,
and the asymptotic checks built on the p_1 profile.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from scipy import integrate

from ..specfun.gamma import gamma, log_gamma
from .kernels import harmonic_profile_m, phi_lambda, qy_profile
from .params import Params
from .stable_density import (
    RadialProfile,
    get_p1_profile,
    large_series_coefficient,
    p1_fourier_inversion,
    pt_profile,
)


@dataclass(eq=False)
class MProfile:
    """m and m' built on a p_1 RadialProfile."""

    params: Params
    p1: RadialProfile

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        exponent = self.params.d + self.params.alpha
        value = np.power(r, exponent) * np.asarray(self.p1(r)) / self.params.c_dalpha
        return float(value) if value.ndim == 0 else value

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        exponent = self.params.d + self.params.alpha
        p = np.asarray(self.p1(r))
        dp = np.asarray(self.p1.derivative(r))
        with np.errstate(divide="ignore", invalid="ignore"):
            value = (exponent * np.power(r, exponent - 1.0) * p + np.power(r, exponent) * dp) / self.params.c_dalpha
        value = np.where(r > 0, value, 0.0)
        return float(value) if value.ndim == 0 else value

    @property
    def grid(self) -> np.ndarray:
        return self.p1.grid


def profile_m(params: Params) -> MProfile:
    """
    Profile m of p_1 with derivative m'.

    Args:
        params: Problem parameters

    Returns:
        MProfile sharing the cached p_1 profile
    """
    return MProfile(params, get_p1_profile(params))


def m_prime_integral(params: Params) -> Dict[str, float]:
    """
    int_0^inf m'(r) dr: quadrature of m' on the grid plus the series tail 1 - m(rho_max).

    Returns:
        Dict with the integral and its two parts
    """
    m = profile_m(params)
    rho_max = m.p1.rho_max
    edges = np.concatenate([[0.0], np.geomspace(1e-3, rho_max, 25)])
    grid_part = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, _ = integrate.quad(lambda r: float(m.derivative(r)), lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
        grid_part += value
    tail_part = 1.0 - float(m(rho_max))
    return {"integral": grid_part + tail_part, "grid_part": grid_part, "tail_part": tail_part}


def m_prime_asymptote(params: Params) -> float:
    """
    lim r^{1+alpha} m'(r) = -alpha a_2 / c_{d,alpha}, a_2 the second large-r coefficient of p_1.
    """
    a2 = large_series_coefficient(params, 2)
    return -params.alpha * a2 / params.c_dalpha


def m_prime_asymptote_as_displayed(params: Params) -> float:
    """The constant (1/c_{d,alpha}) 2^{2 alpha - d/2 - 1} Gamma(d/2 + alpha) / Gamma(-alpha)."""
    d, alpha = params.d, params.alpha
    return 2.0 ** (2 * alpha - d / 2.0 - 1.0) * gamma(d / 2.0 + alpha) / gamma(-alpha) / params.c_dalpha


def heat_limit_check(params: Params, rho: float = 50.0) -> Dict[str, Any]:
    """
    Compare rho^{d+alpha} p_1(rho) / c_{d,alpha} from brute-force inversion
    with 1 and with the two-term expansion 1 + a_2 rho^{-alpha} / c_{d,alpha}.

    Returns:
        Dict with raw ratio, two-term prediction and residuals
    """
    if params.alpha == 1.0:
        p = float(pt_profile(params, rho, 1.0))
    else:
        p, _ = p1_fourier_inversion(params, rho)
    ratio = rho ** (params.d + params.alpha) * p / params.c_dalpha
    two_term = 1.0 + large_series_coefficient(params, 2) * rho ** (-params.alpha) / params.c_dalpha
    return {
        "rho": rho,
        "ratio": ratio,
        "leading_residual": abs(ratio - 1.0),
        "two_term_prediction": two_term,
        "two_term_residual": abs(ratio - two_term),
    }


def small_time_check(params: Params, rho: float = 1.0, t: float = 1e-6) -> Dict[str, float]:
    """
    p_t(z)/t -> nu(z) as t -> 0: relative residual at |z| = rho.
    """
    ratio = float(pt_profile(params, rho, t)) / t
    nu = params.c_dalpha * rho ** (-params.d - params.alpha)
    return {"t": t, "rho": rho, "ratio": ratio, "nu": nu, "residual": abs(ratio - nu) / nu}


def profile_m_harmonic(params: Params):
    """Closed-form profile of q_1, checked against kernel_qy."""
    return lambda r: harmonic_profile_m(params, r)


def harmonic_profile_consistency(params: Params, radii=(0.1, 1.0, 10.0)) -> float:
    """Max deviation between the closed-form q_1 profile and kernel_qy-derived values."""
    worst = 0.0
    for r in radii:
        direct = r ** (params.d + params.alpha) * float(qy_profile(params, r, 1.0)) / params.c_dalpha
        worst = max(worst, abs(direct - float(harmonic_profile_m(params, r))))
    return worst


def pt_two_sided_ratio(params: Params, rho_max: float = 50.0, n: int = 200) -> Dict[str, float]:
    """
    Bounds of p_1(z) / min(1, |z|^{-d-alpha}) on |z| in [0, rho_max].
    """
    rho = np.concatenate([[0.0], np.geomspace(1e-3, rho_max, n)])
    p = np.asarray(pt_profile(params, rho, 1.0))
    with np.errstate(divide="ignore"):
        shape = np.minimum(1.0, np.where(rho > 0, rho, 1e-300) ** (-params.d - params.alpha))
    ratio = p / shape
    return {"lower": float(ratio.min()), "upper": float(ratio.max())}



def qy_fourier_transform(params: Params, xi: float, y: float) -> float:
    """
    F q_y(xi) through the 1D projection of q_y onto the direction of xi:

        P(x) = c y pi^{(d-1)/2} Gamma((1+alpha)/2) / Gamma((d+alpha)/2) (a + x^2)^{-(1+alpha)/2}

    followed by a cosine transform on [0, inf).
    """
    d, alpha = params.d, params.alpha
    a = (y / params.c_alpha) ** (2.0 / alpha)
    log_const = (
        (d - 1) / 2.0 * math.log(math.pi)
        + float(log_gamma((1.0 + alpha) / 2.0))
        - float(log_gamma((d + alpha) / 2.0))
    )
    const = params.c_dalpha * y * math.exp(log_const)
    projection = lambda x: const * (a + x * x) ** (-(1.0 + alpha) / 2.0)
    if xi == 0:
        value, _ = integrate.quad(projection, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
    else:
        value, _ = integrate.quad(projection, 0.0, np.inf, weight="cos", wvar=xi, epsabs=1e-13, limlst=200)
    return 2.0 * value


def qy_fourier_check(params: Params, y: float = 1.0, xis=(0.5, 1.0, 2.0)) -> Dict[str, Any]:
    """
    Compare F q_y(xi) with phi_{|xi|^2}(y) at a few frequencies.

    Returns:
        Dict with per-frequency rows and the worst absolute residual
    """
    rows = []
    for xi in xis:
        transform = qy_fourier_transform(params, xi, y)
        expected = phi_lambda(params, xi * xi, y)
        rows.append({"xi": xi, "transform": transform, "phi": expected, "residual": abs(transform - expected)})
    return {"rows": rows, "max_residual": max(r["residual"] for r in rows)}


def qy_mass(params: Params, y: float) -> float:
    """int q_y(z) dz, equal to F q_y(0)."""
    return qy_fourier_transform(params, 0.0, y)
