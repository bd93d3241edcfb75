"""
Closed-form convolution kernels: nu, nu_r, nu-tilde_r, heat, q_y, phi_lambda,
the Laplacian resolvent, and the alpha = 1 subordinator density.

Points are arrays whose last axis has length d; for d = 1 a bare scalar is
accepted. Kernels are evaluated on |z| and broadcast over leading axes.
"""

import math
from typing import Union

import numpy as np
from scipy import special

from ..specfun.bessel import bessel_k
from ..specfun.gamma import gamma
from ..utils.errors import DomainError, UnsupportedError
from .params import Params

ArrayLike = Union[float, np.ndarray]


def radius(z, d: int) -> ArrayLike:
    """
    Euclidean norm of a point or array of points.

    Args:
        z: Point(s), last axis of length d (scalar allowed when d = 1)
        d: Dimension

    Returns:
        |z| as float or array over the leading axes
    """
    arr = np.asarray(z, dtype=float)
    if d == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        out = np.abs(arr)
    else:
        out = np.linalg.norm(arr, axis=-1)
    return out.item() if np.ndim(out) == 0 else out


def _restore(value, like):
    return np.asarray(value).item() if np.ndim(like) == 0 else value


def kernel_nu(params: Params, z, r: float = 0.0) -> ArrayLike:
    """
    Levy kernel nu_r(z) = c_{d,alpha} |z|^{-d-alpha} 1_{|z| > r}.

    Raises:
        DomainError: If z = 0 with r = 0
    """
    rho = np.asarray(radius(z, params.d))
    if r == 0 and np.any(rho == 0):
        raise DomainError("kernel_nu is singular at z = 0")
    safe = np.where(rho > 0, rho, 1.0)
    value = np.where(rho > r, params.c_dalpha * safe ** (-params.d - params.alpha), 0.0)
    return _restore(value, rho)


def kernel_nu_tilde(params: Params, z, r: float) -> ArrayLike:
    """
    Dynkin kernel c_{d,alpha} / (|z|^d (|z|^2 - r^2)^{alpha/2}) on |z| > r, else 0.
    """
    if not r > 0:
        raise DomainError(f"kernel_nu_tilde requires r > 0, got {r}")
    rho = np.asarray(radius(z, params.d))
    outside = rho > r
    safe = np.where(outside, rho, 2.0 * r)
    value = params.c_dalpha / (safe ** params.d * (safe * safe - r * r) ** (params.alpha / 2.0))
    return _restore(np.where(outside, value, 0.0), rho)


def heat_profile(d: int, rho: ArrayLike, t: float) -> ArrayLike:
    """Gauss-Weierstrass kernel (4 pi t)^{-d/2} exp(-rho^2 / 4t) as a function of radius."""
    return (4.0 * math.pi * t) ** (-d / 2.0) * np.exp(-np.square(rho) / (4.0 * t))


def kernel_heat(params: Params, z, t: float) -> ArrayLike:
    """Heat kernel k_t(z); variance 2t per coordinate."""
    if not t > 0:
        raise DomainError(f"kernel_heat requires t > 0, got {t}")
    rho = np.asarray(radius(z, params.d))
    return _restore(heat_profile(params.d, rho, t), rho)


def cauchy_profile(d: int, rho: ArrayLike, t: float) -> ArrayLike:
    """alpha = 1 stable density Gamma((d+1)/2)/pi^{(d+1)/2} t/(t^2 + rho^2)^{(d+1)/2}."""
    const = gamma((d + 1) / 2.0) / math.pi ** ((d + 1) / 2.0)
    return const * t / (t * t + np.square(rho)) ** ((d + 1) / 2.0)


def qy_profile(params: Params, rho: ArrayLike, y: float) -> ArrayLike:
    """Harmonic-extension kernel as a function of radius."""
    a = (y / params.c_alpha) ** (2.0 / params.alpha)
    return params.c_dalpha * y / (a + np.square(rho)) ** ((params.d + params.alpha) / 2.0)


def poisson_tail_mass(d: int, alpha: float, w: float) -> float:
    """
    int_w^inf u^{d-1} (1 + u^2)^{-(d+alpha)/2} du in closed form.

    With v = 1/(1 + u^2) the integral is B(alpha/2, d/2) I_v(alpha/2, d/2) / 2.
    """
    if w < 0:
        raise DomainError(f"tail mass needs w >= 0, got {w}")
    a, b = alpha / 2.0, d / 2.0
    return 0.5 * float(special.beta(a, b) * special.betainc(a, b, 1.0 / (1.0 + w * w)))


def kernel_qy(params: Params, z, y: float) -> ArrayLike:
    """
    Kernel q_y(z) = c_{d,alpha} y / ((y/c_alpha)^{2/alpha} + |z|^2)^{(d+alpha)/2}.
    """
    if not y > 0:
        raise DomainError(f"kernel_qy requires y > 0, got {y}")
    rho = np.asarray(radius(z, params.d))
    return _restore(qy_profile(params, rho, y), rho)


def phi_lambda(params: Params, lam: float, y: float) -> float:
    """
    Bounded solution of the extension ODE with phi(0) = 1.

    phi_lambda(y) = 2^{1-alpha/2}/Gamma(alpha/2) w^{1/2} K_{alpha/2}(w^{1/alpha}),
    w = lambda^{alpha/2} y / c_alpha.

    Args:
        params: Problem parameters
        lam: Spectral parameter lambda >= 0
        y: Height y >= 0

    Returns:
        phi_lambda(y) in (0, 1]
    """
    if lam < 0 or y < 0:
        raise DomainError(f"phi_lambda requires lambda >= 0 and y >= 0 (got {lam}, {y})")
    if lam == 0 or y == 0:
        return 1.0
    alpha = params.alpha
    w = lam ** (alpha / 2.0) * y / params.c_alpha
    x = w ** (1.0 / alpha)
    if x > 700.0:
        return 0.0
    prefactor = 2.0 ** (1.0 - alpha / 2.0) / gamma(alpha / 2.0)
    return prefactor * math.sqrt(w) * bessel_k(alpha / 2.0, x)


def resolvent_profile(d: int, rho: ArrayLike, s: float) -> ArrayLike:
    """Kernel of (sI - Laplacian)^{-1} as a function of radius rho > 0."""
    root = math.sqrt(s)
    rho = np.asarray(rho, dtype=float)
    if d == 1:
        return np.exp(-root * rho) / (2.0 * root)
    if d == 2:
        return np.asarray(bessel_k(0.0, root * rho)) / (2.0 * math.pi)
    return np.exp(-root * rho) / (4.0 * math.pi * rho)


def kernel_resolvent_laplacian(params: Params, x, s: float) -> ArrayLike:
    """
    Convolution kernel of (sI - Laplacian)^{-1}, symbol 1/(s + |xi|^2).

    Raises:
        DomainError: If s <= 0 or x = 0
    """
    if not s > 0:
        raise DomainError(f"resolvent requires s > 0, got {s}")
    rho = np.asarray(radius(x, params.d))
    if np.any(rho == 0):
        raise DomainError("resolvent kernel evaluated at x = 0")
    return _restore(resolvent_profile(params.d, rho, s), rho)


def resolvent_kernel_as_displayed(params: Params, x, s: float) -> float:
    """
    Bessel-form resolvent kernel (2 pi)^{-d/2} (sqrt(s)|x|)^{1-d/2} K_{d/2-1}(sqrt(s)|x|).

    Differs from kernel_resolvent_laplacian by the factor s^{1-d/2}; kept for
    the informational audit row.
    """
    rho = float(radius(x, params.d))
    arg = math.sqrt(s) * rho
    nu = params.d / 2.0 - 1.0
    return (2.0 * math.pi) ** (-params.d / 2.0) * arg ** (1.0 - params.d / 2.0) * bessel_k(nu, arg)


def eta_alpha1(s: ArrayLike, params: Params = None) -> ArrayLike:
    """
    Density of the 1/2-stable subordinator at time 1 (Laplace transform e^{-sqrt(xi)}).

    Args:
        s: Positive time(s)
        params: Optional parameters; must have alpha = 1 when given

    Raises:
        UnsupportedError: If params.alpha != 1
    """
    if params is not None and params.alpha != 1.0:
        raise UnsupportedError(f"eta is available only for alpha = 1 (got alpha={params.alpha})")
    s_arr = np.asarray(s, dtype=float)
    value = s_arr ** (-1.5) * np.exp(-1.0 / (4.0 * s_arr)) / (2.0 * math.sqrt(math.pi))
    return _restore(value, s_arr)


def harmonic_profile_m(params: Params, r: ArrayLike) -> ArrayLike:
    """
    Profile c_{d,alpha}^{-1} |z|^{d+alpha} q_1(z) = (r^2 / (c_alpha^{-2/alpha} + r^2))^{(d+alpha)/2}.
    """
    a = params.c_alpha ** (-2.0 / params.alpha)
    r2 = np.square(np.asarray(r, dtype=float))
    value = (r2 / (a + r2)) ** ((params.d + params.alpha) / 2.0)
    return _restore(value, r2)
