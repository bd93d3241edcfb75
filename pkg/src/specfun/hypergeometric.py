"""
Gauss hypergeometric function 2F1(a, b; c; z) for real parameters and z < 1.

    |z| <= 1/2          direct series
    z < -1/2            Pfaff transformation to w = z/(z - 1) in (1/3, 1)
    1/2 < z < 1 (or w)  series when the argument is moderate, otherwise the
                        1 - z connection formula; a long direct series is
                        used when c - a - b is (nearly) an integer
"""

import math

import numpy as np

from ..utils.errors import DomainError, NonConvergenceError, PoleError
from .gamma import gamma, rgamma

_CHUNK = 512
_SERIES_TOL = 1e-17
_MAX_TERMS = 2_000_000
_DIRECT_LIMIT = 0.9
_INTEGER_GAP = 1e-7


def _is_nonpositive_integer(v: float) -> bool:
    return v <= 0 and v == math.floor(v)


def hyp2f1_series(a: float, b: float, c: float, z: float, max_terms: int = _MAX_TERMS) -> float:
    """
    Direct power series of 2F1, summed in vectorized chunks.

    Args:
        a, b, c: Parameters (c not a non-positive integer)
        z: Argument with |z| < 1
        max_terms: Term budget

    Returns:
        Partial sum accurate to roughly machine precision

    Raises:
        NonConvergenceError: If the term budget is exhausted
    """
    total = 1.0
    last = 1.0
    start = 0
    while start < max_terms:
        k = np.arange(start, start + _CHUNK, dtype=float)
        ratios = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        terms = last * np.cumprod(ratios)
        total += float(np.sum(terms))
        last = float(terms[-1])
        if not np.isfinite(total):
            raise NonConvergenceError(f"hyp2f1 series overflow at z={z}")
        if last == 0.0 or np.all(np.abs(terms[-8:]) <= _SERIES_TOL * abs(total)):
            return total
        start += _CHUNK
    raise NonConvergenceError(f"hyp2f1 series did not converge within {max_terms} terms (z={z})")


def _connection(a: float, b: float, c: float, z: float) -> float:
    """1 - z connection formula, valid for non-integer c - a - b."""
    s = c - a - b
    w = 1.0 - z
    gc = gamma(c)
    first = gc * gamma(s) * rgamma(c - a) * rgamma(c - b)
    second = gc * gamma(-s) * rgamma(a) * rgamma(b)
    value = 0.0
    if first != 0.0:
        value += first * hyp2f1_series(a, b, 1.0 - s, w)
    if second != 0.0:
        value += second * w ** s * hyp2f1_series(c - a, c - b, 1.0 + s, w)
    return value


def _hyp2f1_unit_interval(a: float, b: float, c: float, z: float) -> float:
    """2F1 for 0 <= z < 1."""
    if z <= _DIRECT_LIMIT:
        return hyp2f1_series(a, b, c, z)
    s = c - a - b
    if abs(s - round(s)) < _INTEGER_GAP:
        return hyp2f1_series(a, b, c, z)
    return _connection(a, b, c, z)


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """
    Gauss hypergeometric function 2F1(a, b; c; z).

    Args:
        a, b, c: Real parameters
        z: Real argument, z < 1

    Returns:
        2F1(a, b; c; z)

    Raises:
        PoleError: If c is a non-positive integer
        DomainError: If z >= 1
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpositive_integer(c):
        raise PoleError(f"hyp2f1 undefined for non-positive integer c={c}")
    if not z < 1.0:
        raise DomainError(f"hyp2f1 requires z < 1, got z={z}")

    if z == 0.0:
        return 1.0
    if abs(z) <= 0.5:
        return hyp2f1_series(a, b, c, z)
    if z > 0.5:
        return _hyp2f1_unit_interval(a, b, c, z)

    # Pfaff: 2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1))
    w = z / (z - 1.0)
    prefactor = (1.0 - z) ** (-a)
    if w <= _DIRECT_LIMIT:
        return prefactor * hyp2f1_series(a, c - b, c, w)
    return prefactor * _hyp2f1_unit_interval(a, c - b, c, w)
