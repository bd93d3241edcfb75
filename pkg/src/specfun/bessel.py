"""
Modified Bessel function of the second kind K_nu(x) for real order.

Two regimes with a seam at x = 2: Temme's series for K_mu, K_{mu+1} with
|mu| <= 1/2 on small x, Steed's continued fraction CF2 above; the order is
then raised to nu by forward recurrence, which is stable for K.
"""

import math
from typing import Tuple, Union

import numpy as np

from ..utils.errors import DomainError, NonConvergenceError
from .gamma import gamma

ArrayLike = Union[float, np.ndarray]

_EULER_GAMMA = 0.5772156649015329
# Coefficient of z^3 in the Taylor series of 1/Gamma(1 + z)
_RGAMMA_C3 = -0.0420026350340952
_EPS = 1e-16
_MAX_ITER = 10000
_X_SEAM = 2.0


def _temme_gammas(mu: float) -> Tuple[float, float, float, float]:
    """
    Gamma combinations of Temme's series.

    Returns:
        (gam1, gam2, 1/Gamma(1 + mu), 1/Gamma(1 - mu))
    """
    gampl = 1.0 / gamma(1.0 + mu)
    gammi = 1.0 / gamma(1.0 - mu)
    gam2 = 0.5 * (gammi + gampl)
    if abs(mu) < 1e-3:
        gam1 = -(_EULER_GAMMA + _RGAMMA_C3 * mu * mu)
    else:
        gam1 = (gammi - gampl) / (2.0 * mu)
    return gam1, gam2, gampl, gammi


def _k_pair_series(mu: float, x: float) -> Tuple[float, float]:
    """K_mu(x) and K_{mu+1}(x) by Temme's series, x <= 2."""
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
    d = -math.log(x2)
    e = mu * d
    fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
    gam1, gam2, gampl, gammi = _temme_gammas(mu)

    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    e = math.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = 1.0
    dd = x2 * x2
    total1 = p
    mu2 = mu * mu

    for i in range(1, _MAX_ITER):
        ff = (i * ff + p + q) / (i * i - mu2)
        c *= dd / i
        p /= (i - mu)
        q /= (i + mu)
        term = c * ff
        total += term
        total1 += c * (p - i * ff)
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise NonConvergenceError(f"bessel_k series did not converge (mu={mu}, x={x})")

    return total, total1 * 2.0 / x


def _k_pair_cf2(mu: float, x: float) -> Tuple[float, float]:
    """K_mu(x) and K_{mu+1}(x) by Steed's CF2, x > 2."""
    mu2 = mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25 - mu2
    q = c = a1
    a = -a1
    s = 1.0 + q * delh

    for i in range(2, _MAX_ITER):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:
        raise NonConvergenceError(f"bessel_k continued fraction did not converge (mu={mu}, x={x})")

    h = a1 * h
    k_mu = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k_mu1 = k_mu * (mu + x + 0.5 - h) / x
    return k_mu, k_mu1


def _bessel_k_scalar(nu: float, x: float) -> float:
    if not x > 0:
        raise DomainError(f"bessel_k requires x > 0, got {x}")
    nu = abs(nu)
    n_up = int(nu + 0.5)
    mu = nu - n_up

    if x <= _X_SEAM:
        k_mu, k_mu1 = _k_pair_series(mu, x)
    else:
        k_mu, k_mu1 = _k_pair_cf2(mu, x)

    for i in range(1, n_up + 1):
        k_next = (mu + i) * (2.0 / x) * k_mu1 + k_mu
        k_mu = k_mu1
        k_mu1 = k_next

    return k_mu


def bessel_k(nu: float, x: ArrayLike) -> ArrayLike:
    """
    Modified Bessel function of the second kind, K_nu(x).

    K_{-nu} = K_nu, so only |nu| is used.

    Args:
        nu: Real order
        x: Positive argument(s)

    Returns:
        K_nu(x), same shape as x

    Raises:
        DomainError: If any x <= 0
    """
    if np.ndim(x) == 0:
        return _bessel_k_scalar(float(nu), float(x))
    arr = np.asarray(x, dtype=float)
    return np.array([_bessel_k_scalar(float(nu), float(v)) for v in arr.ravel()]).reshape(arr.shape)
