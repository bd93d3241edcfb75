"""
Angular rules on the unit sphere and segmented adaptive radial quadrature.

Every kernel in the library is radial, so integrals over R^d are written as

    int_0^inf K(rho) rho^{d-1} S(rho) d rho,   S(rho) = sum_j w_j f(x + rho theta_j)

with S the spherical sum of f about x.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
from scipy import integrate, special

from ..utils.errors import DomainError
from ..utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_ANGULAR_SIZES = {2: (64,), 3: (24, 48)}


@dataclass(frozen=True)
class SphereRule:
    """Quadrature nodes on S^{d-1}; weights sum to the sphere area."""

    d: int
    directions: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=16)
def sphere_rule(d: int, n_polar: Optional[int] = None, n_azimuth: Optional[int] = None) -> SphereRule:
    """
    Build the angular rule for dimension d.

    d = 1: the two directions +1, -1 with unit weights.
    d = 2: trapezoid rule in the angle (default 64 nodes).
    d = 3: Gauss-Legendre in cos(theta) times trapezoid in phi.

    Args:
        d: Dimension
        n_polar: Angle count (d = 2) or Gauss-Legendre nodes in cos(theta) (d = 3)
        n_azimuth: Trapezoid nodes in phi (d = 3)

    Returns:
        SphereRule
    """
    if d == 1:
        return SphereRule(1, np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]))

    if d == 2:
        n = n_polar or DEFAULT_ANGULAR_SIZES[2][0]
        angles = 2.0 * math.pi * np.arange(n) / n
        directions = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        return SphereRule(2, directions, np.full(n, 2.0 * math.pi / n))

    if d == 3:
        n_mu = n_polar or DEFAULT_ANGULAR_SIZES[3][0]
        n_phi = n_azimuth or DEFAULT_ANGULAR_SIZES[3][1]
        mu, w_mu = np.polynomial.legendre.leggauss(n_mu)
        phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
        mu_grid, phi_grid = np.meshgrid(mu, phi, indexing="ij")
        st_grid = np.sqrt(1.0 - mu_grid * mu_grid)
        directions = np.stack(
            [st_grid * np.cos(phi_grid), st_grid * np.sin(phi_grid), mu_grid], axis=-1
        ).reshape(-1, 3)
        weights = np.outer(w_mu, np.full(n_phi, 2.0 * math.pi / n_phi)).ravel()
        return SphereRule(3, directions, weights)

    raise DomainError(f"No angular rule for d={d}")


def as_point(x, d: int) -> np.ndarray:
    """Coerce a point to a float array of shape (d,)."""
    arr = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if arr.shape != (d,):
        raise DomainError(f"Point {x!r} does not have dimension {d}")
    return arr


def spherical_sum(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray, rho, rule: SphereRule) -> np.ndarray:
    """
    S(rho) = sum_j w_j f(x + rho theta_j), vectorized over rho.

    Args:
        func: Evaluator over arrays of points with last axis d
        x: Centre, shape (d,)
        rho: Radius or array of radii
        rule: Angular rule

    Returns:
        Array with the shape of rho
    """
    rho_arr = np.asarray(rho, dtype=float)
    pts = x + rho_arr[..., None, None] * rule.directions
    values = func(pts)
    return np.asarray(values @ rule.weights) if np.ndim(values) else values


@dataclass
class QuadResult:
    """Outcome of a segmented quadrature."""

    value: float
    error: float
    ok: bool
    segments: int = 0
    evaluations: int = 0


def segment_points(a: float, b: float, breakpoints: Iterable[float] = (), decades: bool = True) -> np.ndarray:
    """
    Sorted segment boundaries on [a, b]: the endpoints, breakpoints inside,
    and powers of ten inside (a, b) when decades is set.
    """
    pts = {float(a), float(b)}
    for p in breakpoints:
        if a < p < b:
            pts.add(float(p))
    if decades and b > 0:
        lo = a if a > 0 else min([p for p in pts if p > 0], default=b)
        if lo > 0 and b / lo > 10.0:
            for k in range(int(math.floor(math.log10(lo))) + 1, int(math.ceil(math.log10(b)))):
                p = 10.0 ** k
                if a < p < b:
                    pts.add(p)
    return np.array(sorted(pts))


def radial_quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    breakpoints: Iterable[float] = (),
    epsabs: float = 1e-11,
    epsrel: float = 1e-10,
    limit: int = 200,
    decades: bool = True,
    weight: Optional[str] = None,
    wvar=None,
) -> QuadResult:
    """
    Adaptive Gauss-Kronrod quadrature on [a, b] split into segments.

    Args:
        func: Scalar integrand
        a, b: Limits (b may be inf for the last segment)
        breakpoints: Points where the integrand is not smooth
        epsabs, epsrel: Tolerances (epsabs is shared between segments)
        limit: Subinterval limit per segment
        decades: Also split at powers of ten
        weight, wvar: Passed to scipy quad for a single unsplit segment

    Returns:
        QuadResult with summed value and error
    """
    if b <= a:
        return QuadResult(0.0, 0.0, True)

    if weight is not None:
        pts = np.array([a, b])
    elif not math.isfinite(b):
        inner = [p for p in breakpoints if p > a]
        top = max(inner + [10.0 * a if a > 0 else 1.0])
        pts = np.append(segment_points(a, top, inner, decades), np.inf)
    else:
        pts = segment_points(a, b, breakpoints, decades)

    n_seg = len(pts) - 1
    seg_abs = epsabs / max(n_seg, 1)
    total = 0.0
    error = 0.0
    ok = True
    evaluations = 0

    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi <= lo:
            continue
        kwargs = dict(epsabs=seg_abs, epsrel=epsrel, limit=limit, full_output=1)
        if weight is not None:
            kwargs.update(weight=weight, wvar=wvar)
        result = integrate.quad(func, lo, hi, **kwargs)
        value, abserr, info = result[0], result[1], result[2]
        total += value
        error += abserr
        evaluations += int(info.get("neval", 0)) if isinstance(info, dict) else 0
        if len(result) > 3:
            ok = False
            logger.debug(f"quad warning on [{lo:.3g}, {hi:.3g}]: {result[3][:80]}")

    return QuadResult(total, error, ok, n_seg, evaluations)



OSCILLATION_INTERVALS = 4000
QUIET_PANELS = 3
PROFILE_SCALES = (0.1, 1.0, 10.0, 100.0)


def _sphere_area(d: int) -> float:
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@lru_cache(maxsize=4)
def _j0_zeros(count: int) -> np.ndarray:
    return special.jn_zeros(0, count)


def _oscillation_nodes(d: int, R: float, count: int) -> np.ndarray:
    """Sign changes of the radial plane-wave factor: cos(sR), J0(sR), sin(sR)."""
    k = np.arange(1, count + 1, dtype=float)
    if d == 1:
        return (k - 0.5) * math.pi / R
    if d == 2:
        return _j0_zeros(count) / R
    return k * math.pi / R


def _plane_wave(d: int, R: float) -> Callable[[float], float]:
    """Radial factor with (2 pi)^{-d} and the sphere area folded in."""
    if d == 1:
        return lambda s: math.cos(s * R) / math.pi
    if d == 2:
        return lambda s: s * special.j0(s * R) / (2.0 * math.pi)
    return lambda s: s * math.sin(s * R) / (2.0 * math.pi ** 2 * R)


def radial_fourier_inverse(profile: Callable[[float], float], R: float, d: int,
                           epsabs: float = 1e-14) -> Tuple[float, float]:
    """
    (2 pi)^{-d} int_{R^d} G(|xi|) e^{i xi . v} d xi at |v| = R for a radial profile G.

    The radial integral is summed panel by panel between consecutive sign
    changes of the plane-wave factor (cos for d = 1, J0 for d = 2, sin for
    d = 3). Profiles such as s^alpha G(s) are only Hoelder at s = 0, so the
    first panel is integrated by adaptive Gauss-Kronrod rather than an
    oscillatory weight. The sum stops after three negligible panels; otherwise
    the last two partial sums are averaged and their gap is added to the error.

    Args:
        profile: Scalar radial profile G(s), integrable against s^{d-1}
        R: Radius |v| >= 0
        d: Dimension

    Returns:
        (value, error estimate)
    """
    if R < 0:
        raise DomainError("radial_fourier_inverse requires R >= 0")

    if R == 0.0:
        result = radial_quad(lambda s: profile(s) * s ** (d - 1), 0.0, math.inf,
                             breakpoints=[1.0, 10.0], epsabs=epsabs, epsrel=1e-12)
        return _sphere_area(d) * result.value / (2.0 * math.pi) ** d, result.error

    wave = _plane_wave(d, R)
    edges = np.concatenate([[0.0], _oscillation_nodes(d, R, OSCILLATION_INTERVALS)])
    partial = 0.0
    previous = 0.0
    error = 0.0
    quiet = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        # wide panels (small R) must still resolve the profile near the origin
        inner = [p for p in PROFILE_SCALES if lo < p < hi] or None
        piece, piece_err = integrate.quad(lambda s: profile(s) * wave(s), lo, hi, points=inner,
                                          epsabs=epsabs, epsrel=1e-12, limit=200)
        previous = partial
        partial += piece
        error += piece_err
        quiet = quiet + 1 if abs(piece) <= epsabs else 0
        if quiet >= QUIET_PANELS:
            break
    if quiet >= QUIET_PANELS:
        return partial, error
    logger.debug(f"Fourier inversion at R={R:g} did not settle in {OSCILLATION_INTERVALS} panels")
    return 0.5 * (partial + previous), error + abs(partial - previous)
