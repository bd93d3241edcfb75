"""
Numerical checks of the ball identities: Poisson normalization, Green mass,
pi_r = int gamma_r nu, the far-field limit, gamma_r-pi_r-nu-tilde and the
nu_R / nu-tilde_r cross-identity.
"""

import math
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy import integrate

from ..kernels.kernels import kernel_nu, kernel_nu_tilde
from ..kernels.params import Params
from ..kernels.radial import SphereRule, radial_quad, sphere_rule
from ..specfun.gamma import gamma
from ..utils.errors import QuadratureError
from ..utils.logger import get_logger
from .ball import BallSpec, green_ball, green_mass, poisson_ball, poisson_constant

logger = get_logger(__name__)

IDENTITY_RULE_SIZES = {1: (), 2: (128,), 3: (32, 64)}
EXTERIOR_DECADES = 4


def identity_rule(d: int) -> SphereRule:
    """Angular rule used by the ball identities (finer than the operator default)."""
    return sphere_rule(d, *IDENTITY_RULE_SIZES[d])


def _check_quadrature(value: float, error: float, label: str) -> None:
    if not math.isfinite(value) or error > 1e-3 * max(abs(value), 1e-300):
        raise QuadratureError(f"{label}: quadrature did not converge (value={value}, error={error})")


def integrate_over_ball(params: Params, ball: BallSpec, func: Callable[[np.ndarray], float],
                        rule: Optional[SphereRule] = None) -> Dict[str, float]:
    """
    int_{B_r} gamma_r(y, v) func(v) dv in polar coordinates about y.

    Along each ray v = y + rho theta the integrand is rho^{d-1} gamma_r(y, v) func(v)
    on [0, l(theta)], with the singular factor rho^{alpha-1} (alpha < d) at the
    centre and (l - rho)^{alpha/2} at the boundary taken as algebraic weights.

    Returns:
        Dict with value and summed error estimate
    """
    d, alpha = params.d, params.alpha
    ball = ball.with_dimension(d)
    rule = rule or identity_rule(d)
    y = ball.y
    near = alpha - 1.0 if alpha < d else d - 1.0
    total = 0.0
    error = 0.0

    for theta, weight in zip(rule.directions, rule.weights):
        proj = float(y @ theta)
        length = -proj + math.sqrt(proj * proj + ball.r ** 2 - ball.y_norm ** 2)

        def ray(rho, theta=theta, length=length):
            if rho <= 0 or rho >= length:
                return 0.0
            v = y + rho * theta
            if float(v @ v) >= ball.r ** 2:
                return 0.0
            g = green_ball(params, ball, v) * func(v) * rho ** (d - 1)
            return g / (rho ** near * (length - rho) ** (alpha / 2.0))

        value, abserr = integrate.quad(ray, 0.0, length, weight="alg", wvar=(near, alpha / 2.0),
                                       epsabs=1e-13, epsrel=1e-11, limit=200)
        total += weight * value
        error += weight * abserr

    return {"value": total, "error": error}


def green_mass_quadrature(params: Params, ball: BallSpec) -> float:
    """int_{B_r} gamma_r(y, v) dv by quadrature."""
    result = integrate_over_ball(params, ball, lambda v: 1.0)
    _check_quadrature(result["value"], result["error"], "green mass")
    return result["value"]


def check_green_mass(params: Params, ball: BallSpec) -> Dict[str, float]:
    """Closed-form Green mass against quadrature; relative residual."""
    exact = green_mass(params, ball)
    numeric = green_mass_quadrature(params, ball)
    return {"exact": exact, "quadrature": numeric, "residual": abs(numeric - exact) / exact}


def poisson_normalization(params: Params, ball: BallSpec, rule: Optional[SphereRule] = None) -> Dict[str, float]:
    """
    int_{|z| > r} pi_r(y, z) dz in polar coordinates about the origin.

    Along z = rho theta the integrand is

        C (r^2 - |y|^2)^{alpha/2} (rho - r)^{-alpha/2} (rho + r)^{-alpha/2} |rho theta - y|^{-d} rho^{d-1}

    so [r, 2r] carries the algebraic weight (rho - r)^{-alpha/2} exactly and the
    remaining factor is smooth up to rho = r. Beyond 2r the same closed form is
    integrated over decades up to 10^4 r and the infinite tail segment.
    """
    d, alpha = params.d, params.alpha
    ball = ball.with_dimension(d)
    rule = rule or identity_rule(d)
    r, y = ball.r, ball.y
    const = poisson_constant(params) * (r * r - ball.y_norm ** 2) ** (alpha / 2.0)
    total = 0.0
    error = 0.0
    for theta, weight in zip(rule.directions, rule.weights):
        def smooth(rho, theta=theta):
            dist = float(np.linalg.norm(rho * theta - y))
            return const * (rho + r) ** (-alpha / 2.0) * dist ** (-d) * rho ** (d - 1)

        def full(rho, theta=theta):
            return smooth(rho, theta) * (rho - r) ** (-alpha / 2.0)

        head, head_err = integrate.quad(smooth, r, 2.0 * r, weight="alg", wvar=(-alpha / 2.0, 0.0),
                                        epsabs=1e-14, epsrel=1e-12, limit=200)
        far = radial_quad(full, 2.0 * r, math.inf, breakpoints=[r * 10.0 ** k for k in range(1, EXTERIOR_DECADES + 1)],
                          epsabs=1e-14, epsrel=1e-12)
        total += weight * (head + far.value)
        error += weight * (head_err + far.error)
    return {"value": total, "error": error, "residual": abs(total - 1.0)}


def check_green_poisson_identity(params: Params, ball: BallSpec, z) -> Dict[str, float]:
    """
    Relative residual of pi_r(y, z) = int_{B_r} gamma_r(y, v) nu(z - v) dv.

    Raises:
        QuadratureError: If the ball integral fails its error budget
    """
    d = params.d
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    exact = poisson_ball(params, ball, zz)
    result = integrate_over_ball(params, ball, lambda v: float(kernel_nu(params, zz - v)))
    _check_quadrature(result["value"], result["error"], "Green-Poisson identity")
    residual = abs(result["value"] - exact) / exact
    logger.debug(f"Green-Poisson identity d={d} alpha={params.alpha}: residual {residual:.2e}")
    return {"poisson": exact, "quadrature": result["value"], "residual": residual}


def far_field_ratio(params: Params, ball: BallSpec, distance_factor: float = 100.0) -> Dict[str, float]:
    """
    pi_r(y, z) / nu(z) at |z| = distance_factor * r along e_1, against int gamma_r(y, v) dv.
    """
    d = params.d
    ball = ball.with_dimension(d)
    z = np.zeros(d)
    z[0] = distance_factor * ball.r
    ratio = poisson_ball(params, ball, z) / float(kernel_nu(params, z))
    mass = green_mass(params, ball)
    return {"ratio": ratio, "green_mass": mass, "residual": abs(ratio - mass) / mass}


def gamma_pi_nu(params: Params, r: float, z) -> Dict[str, float]:
    """
    pi_r(0, z) / int gamma_r(0, v) dv against nu-tilde_r(z); relative residual.
    """
    d = params.d
    ball = BallSpec(r, np.zeros(d))
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    ratio = poisson_ball(params, ball, zz) / green_mass(params, ball)
    expected = float(kernel_nu_tilde(params, zz, r))
    return {"ratio": ratio, "nu_tilde": expected, "residual": abs(ratio - expected) / expected}


def nu_mu_constant(params: Params, R: float) -> float:
    """4 R^{2-alpha} / (alpha Gamma(alpha/2) |Gamma(-alpha/2)|)."""
    alpha = params.alpha
    return 4.0 * R ** (2.0 - alpha) / (alpha * gamma(alpha / 2.0) * abs(gamma(-alpha / 2.0)))


def check_nu_mu_identity(params: Params, R: float, z) -> Dict[str, Any]:
    """
    Relative residual of

        nu_R(z) = (4 R^{2-alpha} / (alpha Gamma(alpha/2)|Gamma(-alpha/2)|))
                  int_R^inf nu-tilde_r(z) / (r (r^2 - R^2)^{1-alpha/2}) dr.

    nu-tilde_r(z) vanishes for r >= |z|, so the integral runs over (R, |z|) with
    algebraic weights (r - R)^{alpha/2-1} (|z| - r)^{-alpha/2}.

    Returns:
        Dict with both sides and the residual (0 when |z| <= R)
    """
    d, alpha = params.d, params.alpha
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    rho = float(np.linalg.norm(zz))
    if rho <= R:
        return {"lhs": 0.0, "rhs": 0.0, "residual": 0.0}

    def smooth(r):
        return params.c_dalpha / (rho ** d * r * (r + R) ** (1.0 - alpha / 2.0) * (rho + r) ** (alpha / 2.0))

    value, abserr = integrate.quad(smooth, R, rho, weight="alg", wvar=(alpha / 2.0 - 1.0, -alpha / 2.0),
                                   epsabs=0.0, epsrel=1e-13, limit=200)
    _check_quadrature(value, abserr, "nu-nu-tilde identity")
    rhs = nu_mu_constant(params, R) * value
    lhs = float(kernel_nu(params, zz, r=R))
    return {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs) / lhs}
