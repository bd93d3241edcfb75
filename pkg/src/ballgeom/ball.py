"""
M. Riesz kernels of the ball B_r: the Poisson kernel pi_r(y, z), the Green
function gamma_r(y, z) and the Green mass (expected exit time from B_r).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from ..kernels.params import Params, c_dalpha
from ..kernels.radial import radial_quad
from ..specfun.gamma import gamma, log_gamma
from ..specfun.hypergeometric import hyp2f1
from ..utils.errors import DomainError, QuadratureError
from ..utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class BallSpec:
    """Ball B_r centred at the origin with an interior starting point y."""

    r: float
    y: np.ndarray = field(default=None)

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"Ball radius must be positive, got {self.r}")
        y = np.zeros(1) if self.y is None else np.atleast_1d(np.asarray(self.y, dtype=float))
        if float(np.linalg.norm(y)) >= self.r:
            raise DomainError(f"Point y={y.tolist()} is not inside the ball of radius {self.r}")
        object.__setattr__(self, "y", y)

    @property
    def y_norm(self) -> float:
        return float(np.linalg.norm(self.y))

    def with_dimension(self, d: int) -> "BallSpec":
        """Same ball with y padded (or checked) to dimension d."""
        if self.y.shape == (d,):
            return self
        if np.any(self.y) and len(self.y) != d:
            raise DomainError(f"Point y has dimension {len(self.y)}, expected {d}")
        return BallSpec(self.r, np.zeros(d))


def _point(z, d: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(z, dtype=float))
    if arr.shape[-1] != d:
        raise DomainError(f"Point {z!r} does not have dimension {d}")
    return arr


def poisson_constant(params: Params) -> float:
    """Gamma(d/2) pi^{-d/2-1} sin(pi alpha / 2), the Poisson kernel constant."""
    d, alpha = params.d, params.alpha
    return math.exp(float(log_gamma(d / 2.0)) - (d / 2.0 + 1.0) * math.log(math.pi)) * math.sin(math.pi * alpha / 2.0)


def poisson_ball(params: Params, ball: BallSpec, z) -> float:
    """
    Poisson kernel of the ball for the stable process:

        pi_r(y, z) = C ((r^2 - |y|^2) / (|z|^2 - r^2))^{alpha/2} |z - y|^{-d}

    Args:
        params: Problem parameters
        ball: Ball and starting point
        z: Exterior point(s), |z| > r

    Returns:
        Kernel value(s)

    Raises:
        DomainError: If some |z| <= r
    """
    d, alpha, r = params.d, params.alpha, ball.r
    ball = ball.with_dimension(d)
    zz = _point(z, d)
    z2 = np.sum(zz * zz, axis=-1)
    if np.any(z2 <= r * r):
        raise DomainError("poisson_ball requires |z| > r")
    dist = np.linalg.norm(zz - ball.y, axis=-1)
    ratio = (r * r - ball.y_norm ** 2) / (z2 - r * r)
    value = poisson_constant(params) * ratio ** (alpha / 2.0) * dist ** (-d)
    return float(value) if np.ndim(value) == 0 else value


def green_constant(params: Params) -> float:
    """Gamma(d/2) / (2^alpha pi^{d/2} Gamma(alpha/2)^2)."""
    d, alpha = params.d, params.alpha
    return math.exp(
        float(log_gamma(d / 2.0)) - alpha * math.log(2.0) - (d / 2.0) * math.log(math.pi)
        - 2.0 * float(log_gamma(alpha / 2.0))
    )


def green_argument(ball: BallSpec, y, z) -> float:
    """A = (r^2 - |y|^2)(r^2 - |z|^2) / (r^2 |y - z|^2)."""
    r2 = ball.r * ball.r
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    dist2 = float(np.sum((y - z) ** 2))
    return (r2 - float(y @ y)) * (r2 - float(z @ z)) / (r2 * dist2)


def green_inner_integral(params: Params, upper: float) -> float:
    """
    B(A) = int_0^A s^{alpha/2 - 1} (1 + s)^{-d/2} ds.

    alpha < d uses the regularized incomplete beta function, alpha = d = 1
    the closed form 2 arsinh(sqrt(A)), alpha > d adaptive quadrature with an
    algebraic weight at s = 0.
    """
    d, alpha = params.d, params.alpha
    if upper <= 0:
        return 0.0
    a, b = alpha / 2.0, (d - alpha) / 2.0
    if alpha < d:
        complete = math.exp(float(log_gamma(a)) + float(log_gamma(b)) - float(log_gamma(d / 2.0)))
        return complete * float(special.betainc(a, b, upper / (1.0 + upper)))
    if alpha == d:
        return 2.0 * math.asinh(math.sqrt(upper))

    head_end = min(upper, 1.0)
    head = integrate.quad(lambda s: (1.0 + s) ** (-d / 2.0), 0.0, head_end, weight="alg",
                          wvar=(a - 1.0, 0.0), epsabs=1e-14, epsrel=1e-12)
    value = head[0]
    if upper > 1.0:
        tail = radial_quad(lambda s: s ** (a - 1.0) * (1.0 + s) ** (-d / 2.0), 1.0, upper, epsabs=0.0, epsrel=1e-12)
        value += tail.value
    if not math.isfinite(value):
        raise QuadratureError(f"Green inner integral failed at A={upper}")
    return value


def green_diagonal(params: Params, ball: BallSpec) -> float:
    """gamma_r(y, y): +inf for alpha <= d, the finite limit for alpha > d."""
    d, alpha = params.d, params.alpha
    if alpha <= d:
        return math.inf
    ball = ball.with_dimension(d)
    scale = (ball.r ** 2 - ball.y_norm ** 2) ** 2 / ball.r ** 2
    return green_constant(params) * (2.0 / (alpha - d)) * scale ** ((alpha - d) / 2.0)


def green_ball(params: Params, ball: BallSpec, z) -> float:
    """
    Green function of the ball,

        gamma_r(y, z) = Gamma(d/2) / (2^alpha pi^{d/2} Gamma(alpha/2)^2) |y - z|^{alpha-d} B(A).

    Args:
        params: Problem parameters
        ball: Ball and starting point y
        z: Interior point |z| < r

    Returns:
        Green function value; +inf at z = y when alpha <= d

    Raises:
        DomainError: If |z| >= r
    """
    d = params.d
    ball = ball.with_dimension(d)
    zz = _point(z, d)
    if float(zz @ zz) >= ball.r ** 2:
        raise DomainError("green_ball requires |z| < r")
    dist = float(np.linalg.norm(zz - ball.y))
    if dist == 0.0:
        logger.debug("green_ball evaluated on the diagonal")
        return green_diagonal(params, ball)
    upper = green_argument(ball, ball.y, zz)
    return green_constant(params) * dist ** (params.alpha - d) * green_inner_integral(params, upper)


def green_ball_hypergeometric(params: Params, ball: BallSpec, z) -> float:
    """
    Green function through B(A) = (2/alpha) A^{alpha/2} 2F1(d/2, alpha/2; alpha/2 + 1; -A).
    """
    d, alpha = params.d, params.alpha
    ball = ball.with_dimension(d)
    zz = _point(z, d)
    if float(zz @ zz) >= ball.r ** 2:
        raise DomainError("green_ball_hypergeometric requires |z| < r")
    dist = float(np.linalg.norm(zz - ball.y))
    if dist == 0.0:
        return green_diagonal(params, ball)
    upper = green_argument(ball, ball.y, zz)
    inner = (2.0 / alpha) * upper ** (alpha / 2.0) * hyp2f1(d / 2.0, alpha / 2.0, alpha / 2.0 + 1.0, -upper)
    return green_constant(params) * dist ** (alpha - d) * inner


def green_ball_origin(params: Params, r: float, z) -> float:
    """
    gamma_r(0, z) in the forms available for y = 0.

    alpha < d:      c_{d,-alpha}|z|^{alpha-d} minus the 2F1 tail correction
    alpha = d = 1:  (1/pi) arsinh(sqrt(r^2 - z^2) / |z|)
    alpha > d:      the 2F1 form of B(A)
    """
    d, alpha = params.d, params.alpha
    zz = _point(z, d)
    rho = float(np.linalg.norm(zz))
    if rho >= r:
        raise DomainError("green_ball_origin requires |z| < r")
    if rho == 0.0:
        return green_diagonal(params, BallSpec(r, np.zeros(d)))
    upper = (r * r - rho * rho) / (rho * rho)

    if alpha == d:
        return math.asinh(math.sqrt(upper)) / math.pi
    if alpha < d:
        b = (d - alpha) / 2.0
        tail = (1.0 / b) * upper ** (-b) * hyp2f1(d / 2.0, b, b + 1.0, -1.0 / upper)
        return c_dalpha(d, -alpha) * rho ** (alpha - d) - green_constant(params) * rho ** (alpha - d) * tail
    inner = (2.0 / alpha) * upper ** (alpha / 2.0) * hyp2f1(d / 2.0, alpha / 2.0, alpha / 2.0 + 1.0, -upper)
    return green_constant(params) * rho ** (alpha - d) * inner


def green_mass_constant(params: Params) -> float:
    """Gamma(d/2) / (alpha 2^{alpha-1} Gamma(alpha/2) Gamma((d+alpha)/2))."""
    d, alpha = params.d, params.alpha
    return gamma(d / 2.0) / (alpha * 2.0 ** (alpha - 1.0) * gamma(alpha / 2.0) * gamma((d + alpha) / 2.0))


def green_mass(params: Params, ball: BallSpec) -> float:
    """
    Expected exit time E_y tau_{B_r} = int_{B_r} gamma_r(y, v) dv in closed form.
    """
    ball = ball.with_dimension(params.d)
    return green_mass_constant(params) * (ball.r ** 2 - ball.y_norm ** 2) ** (params.alpha / 2.0)
