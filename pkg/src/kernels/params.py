"""
Problem parameters (d, alpha) and the derived normalizing constants.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict

from ..specfun.gamma import log_abs_gamma, log_gamma
from ..utils.errors import DomainError
from ..utils.validators import validate_alpha, validate_dimension


def c_dalpha(d: int, a: float) -> float:
    """
    Kernel constant 2^a Gamma((d+a)/2) / (pi^{d/2} |Gamma(-a/2)|).

    Negative a is allowed (Riesz potential constant c_{d,-alpha} needs d > -a).

    Args:
        d: Dimension
        a: Order, a != 0 and (d + a) > 0

    Returns:
        The constant, assembled in log space

    Raises:
        DomainError: If the constant is undefined
    """
    if a == 0 or (d + a) <= 0:
        raise DomainError(f"c_dalpha undefined for d={d}, a={a}")
    log_value = (
        a * math.log(2.0)
        + float(log_gamma((d + a) / 2.0))
        - (d / 2.0) * math.log(math.pi)
        - log_abs_gamma(-a / 2.0)
    )
    return math.exp(log_value)


def c_alpha_constant(alpha: float) -> float:
    """Harmonic-extension constant |Gamma(-alpha/2)| / (2^alpha Gamma(alpha/2))."""
    log_value = log_abs_gamma(-alpha / 2.0) - alpha * math.log(2.0) - float(log_gamma(alpha / 2.0))
    return math.exp(log_value)


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d (2 for d = 1)."""
    return 2.0 * math.pi ** (d / 2.0) / math.exp(float(log_gamma(d / 2.0)))


@dataclass(frozen=True)
class Params:
    """Dimension and stability index with derived constants."""

    d: int
    alpha: float
    c_dalpha: float = field(init=False, repr=False)
    c_alpha: float = field(init=False, repr=False)
    sigma: float = field(init=False, repr=False)

    def __post_init__(self):
        if not validate_dimension(self.d):
            raise DomainError(f"Dimension d must be 1, 2 or 3, got {self.d}")
        if not validate_alpha(self.alpha):
            raise DomainError(f"alpha must lie in the open interval (0, 2), got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "c_dalpha", c_dalpha(self.d, self.alpha))
        object.__setattr__(self, "c_alpha", c_alpha_constant(self.alpha))
        object.__setattr__(self, "sigma", sphere_area(self.d))

    @property
    def riesz_constant(self) -> float:
        """c_{d,-alpha}; defined only for alpha < d."""
        if not self.alpha < self.d:
            raise DomainError(f"c_(d,-alpha) requires alpha < d (d={self.d}, alpha={self.alpha})")
        return c_dalpha(self.d, -self.alpha)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "alpha": self.alpha,
            "c_dalpha": self.c_dalpha,
            "c_alpha": self.c_alpha,
        }
