"""
Gamma and log-gamma for real arguments.

Lanczos approximation (g = 7, nine coefficients) on x >= 0.5 and the
reflection formula below. Both functions accept scalars or numpy arrays.
"""

import math
from typing import Union

import numpy as np

from ..utils.errors import DomainError, PoleError

ArrayLike = Union[float, np.ndarray]

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_series(xm1: np.ndarray) -> np.ndarray:
    """Lanczos partial-fraction sum evaluated at x - 1."""
    total = np.full_like(xm1, _LANCZOS_COEFFS[0])
    for i in range(1, len(_LANCZOS_COEFFS)):
        total = total + _LANCZOS_COEFFS[i] / (xm1 + i)
    return total


def _is_pole(x: np.ndarray) -> np.ndarray:
    return (x <= 0) & (x == np.floor(x))


def _sinpi(x: np.ndarray) -> np.ndarray:
    """sin(pi x) with argument reduction to keep accuracy for large |x|."""
    n = np.round(x)
    r = x - n
    sign = np.where(np.mod(n, 2) == 0, 1.0, -1.0)
    return sign * np.sin(math.pi * r)


def _gamma_positive(x: np.ndarray) -> np.ndarray:
    """Gamma for x >= 0.5."""
    xm1 = x - 1.0
    t = xm1 + _LANCZOS_G + 0.5
    log_part = _HALF_LOG_2PI + (xm1 + 0.5) * np.log(t) - t
    return np.exp(log_part) * _lanczos_series(xm1)


def _log_gamma_positive(x: np.ndarray) -> np.ndarray:
    xm1 = x - 1.0
    t = xm1 + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (xm1 + 0.5) * np.log(t) - t + np.log(_lanczos_series(xm1))


def _restore(value: np.ndarray, scalar: bool) -> ArrayLike:
    return value.item() if scalar else value


def gamma(x: ArrayLike) -> ArrayLike:
    """
    Gamma function for real arguments.

    Args:
        x: Real argument(s), not a non-positive integer

    Returns:
        Gamma(x), same shape as x

    Raises:
        PoleError: If any x is a non-positive integer
    """
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=float))

    if np.any(_is_pole(arr)):
        raise PoleError(f"gamma has a pole at non-positive integer argument: {x}")

    out = np.empty_like(arr)
    upper = arr >= 0.5
    if np.any(upper):
        out[upper] = _gamma_positive(arr[upper])
    lower = ~upper
    if np.any(lower):
        xl = arr[lower]
        # Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        out[lower] = math.pi / (_sinpi(xl) * _gamma_positive(1.0 - xl))

    return _restore(out, scalar)


def rgamma(x: ArrayLike) -> ArrayLike:
    """
    Reciprocal gamma 1/Gamma(x), entire: returns 0 at the poles.

    Args:
        x: Real argument(s)

    Returns:
        1/Gamma(x)
    """
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(arr)
    regular = ~_is_pole(arr)
    if np.any(regular):
        out[regular] = 1.0 / np.asarray(gamma(arr[regular]))
    return _restore(out, scalar)


def log_gamma(x: ArrayLike) -> ArrayLike:
    """
    Natural log of Gamma for positive arguments.

    Args:
        x: Positive real argument(s)

    Returns:
        ln Gamma(x)

    Raises:
        DomainError: If any x <= 0
    """
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=float))

    if np.any(~(arr > 0)):
        raise DomainError(f"log_gamma requires x > 0, got {x}")

    out = np.empty_like(arr)
    upper = arr >= 0.5
    if np.any(upper):
        out[upper] = _log_gamma_positive(arr[upper])
    lower = ~upper
    if np.any(lower):
        xl = arr[lower]
        # sin(pi x) > 0 on (0, 0.5)
        out[lower] = math.log(math.pi) - np.log(np.sin(math.pi * xl)) - _log_gamma_positive(1.0 - xl)

    return _restore(out, scalar)


def log_abs_gamma(x: float) -> float:
    """
    ln|Gamma(x)| for real non-pole x (negative arguments allowed).

    Args:
        x: Real argument

    Returns:
        ln|Gamma(x)|
    """
    if x > 0:
        return float(log_gamma(x))
    if x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x}")
    s = abs(float(_sinpi(np.array([x]))[0]))
    return math.log(math.pi) - math.log(s) - float(log_gamma(1.0 - x))


def gamma_sign(x: float) -> float:
    """Sign of Gamma(x) for real non-pole x."""
    if x > 0:
        return 1.0
    if x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x}")
    # Gamma alternates sign between consecutive negative integers
    return -1.0 if int(math.floor(x)) % 2 else 1.0
