"""
Resolvent (lambda-potential) kernel of the stable semigroup,
u_lambda(z) = int_0^inf e^{-lambda t} p_t(z) dt, and its two-sided bound shape.
"""

import math
from typing import Any, Dict

import numpy as np

from ..utils.errors import DomainError, QuadratureError
from ..utils.logger import get_logger
from .kernels import radius
from .params import Params
from .radial import radial_quad
from .stable_density import pt_profile

logger = get_logger(__name__)

U_LAMBDA_REL_TOL = 1e-6


def u_lambda_radial(params: Params, rho: float, lam: float) -> Dict[str, float]:
    """
    u_lambda at radius rho via the substitution t = (rho/w)^alpha:

        u = alpha rho^{alpha-d} int_0^inf exp(-lambda (rho/w)^alpha) p_1(w) w^{d-alpha-1} dw

    Returns:
        Dict with value and error

    Raises:
        QuadratureError: If the relative error estimate exceeds 1e-6
    """
    if not lam > 0:
        raise DomainError(f"u_lambda requires lambda > 0, got {lam}")
    if not rho > 0:
        raise DomainError("u_lambda is evaluated at x != 0")
    d, alpha = params.d, params.alpha

    def integrand(w):
        if w <= 0:
            return 0.0
        exponent = lam * (rho / w) ** alpha
        if exponent > 745.0:
            return 0.0
        return math.exp(-exponent) * float(pt_profile(params, w, 1.0)) * w ** (d - alpha - 1.0)

    w0 = rho * lam ** (1.0 / alpha)
    w_lo = w0 * 745.0 ** (-1.0 / alpha)
    knots = [w0 * 0.1, w0, w0 * 10.0, 1.0, 50.0]
    result = radial_quad(integrand, w_lo, math.inf, breakpoints=knots, epsabs=0.0, epsrel=1e-10)
    value = alpha * rho ** (alpha - d) * result.value
    error = alpha * rho ** (alpha - d) * result.error

    if error > U_LAMBDA_REL_TOL * abs(value):
        raise QuadratureError(
            f"u_lambda quadrature error {error:.3e} exceeds tolerance at rho={rho}, lambda={lam}"
        )
    return {"value": value, "error": error}


def kernel_u_lambda(params: Params, x, lam: float) -> float:
    """
    Resolvent kernel u_lambda(x) of the stable semigroup.

    Args:
        params: Problem parameters
        x: Point != 0
        lam: lambda > 0

    Returns:
        u_lambda(x)
    """
    return u_lambda_radial(params, float(radius(x, params.d)), lam)["value"]


def u1_bound_shape(params: Params, rho: np.ndarray) -> np.ndarray:
    """
    Two-sided bound shape of u_1:

        alpha < d:        min(|x|^{alpha-d}, |x|^{-d-alpha})
        alpha = d = 1:    min(log(2 + 1/|x|), |x|^{-2})
        alpha > d = 1:    min(1, |x|^{-1-alpha})
    """
    d, alpha = params.d, params.alpha
    rho = np.asarray(rho, dtype=float)
    far = rho ** (-d - alpha)
    if alpha < d:
        near = rho ** (alpha - d)
    elif alpha == d:
        near = np.log(2.0 + 1.0 / rho)
    else:
        near = np.ones_like(rho)
    return np.minimum(near, far)


def bound_check_u1(params: Params, n: int = 61, rho_min: float = 1e-3, rho_max: float = 1e3) -> Dict[str, Any]:
    """
    Check u_1(x) <= C * shape(|x|) on a log grid and report the smallest working C.

    Returns:
        Report dict with constants C (upper) and c (lower), and pass flag
    """
    grid = np.geomspace(rho_min, rho_max, n)
    values = np.array([u_lambda_radial(params, float(r), 1.0)["value"] for r in grid])
    ratios = values / u1_bound_shape(params, grid)
    upper = float(np.max(ratios))
    lower = float(np.min(ratios))
    logger.debug(f"u_1 bound d={params.d} alpha={params.alpha}: C={upper:.4g}, c={lower:.4g}")
    return {
        "constant": upper,
        "lower_constant": lower,
        "grid_points": n,
        "passed": bool(np.isfinite(upper) and lower > 0),
    }
