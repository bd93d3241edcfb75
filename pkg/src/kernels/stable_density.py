"""
Isotropic alpha-stable density p_1 as a radial profile, the process-wide
profile cache, and p_t by scaling.

p_1(rho) is assembled per node from

* the small-rho series   sum_k (-1)^k Gamma((2k+d)/alpha) / (k! Gamma(k+d/2)) (rho/2)^{2k}
* the large-rho series   sum_k (-1)^{k+1}/k! 2^{k alpha} Gamma((k alpha+d)/2)
                          Gamma(1+k alpha/2) sin(pi k alpha/2) rho^{-k alpha-d}
* radial Fourier inversion (cosine, J0 and sine transforms for d = 1, 2, 3)

A series is used only where its partial sum is free of cancellation and its
smallest term is negligible; elsewhere the inversion integral is evaluated.
"""

import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from ..specfun.gamma import log_gamma
from ..utils.errors import DomainError
from ..utils.logger import get_logger
from .kernels import cauchy_profile, poisson_tail_mass, radius
from .params import Params
from .radial import radial_quad

logger = get_logger(__name__)

SERIES_TERMS = 300
SERIES_TRUNCATION = 1e-15
SERIES_CANCELLATION = 1e3
LOG_OVERFLOW = 700.0
EXP_CUTOFF = 45.0
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(48)

PROFILE_NODES = 2048
PROFILE_RHO_MAX = 50.0
PROFILE_RHO_MIN = 1e-3
GRID_VERSION = 1


def _accept_series(terms: np.ndarray, derivative_terms: Optional[np.ndarray] = None):
    """
    Partial sums of rows of terms, truncated before the smallest nonzero term.

    Returns:
        (values, derivatives or None, ok mask)
    """
    abs_t = np.abs(terms)
    masked = np.where(abs_t > 0, abs_t, np.inf)
    m = np.argmin(masked, axis=1)
    rows = np.arange(terms.shape[0])
    csum = np.cumsum(terms, axis=1)
    running_max = np.maximum.accumulate(abs_t, axis=1)

    prev = np.maximum(m - 1, 0)
    partial = np.where(m > 0, csum[rows, prev], 0.0)
    peak = running_max[rows, prev]
    smallest = masked[rows, m]

    ok = (
        (m > 0)
        & np.isfinite(partial)
        & (partial > 0)
        & (smallest <= SERIES_TRUNCATION * np.abs(partial))
        & (peak <= SERIES_CANCELLATION * np.abs(partial))
    )
    deriv = None
    if derivative_terms is not None:
        dsum = np.cumsum(derivative_terms, axis=1)
        deriv = np.where(m > 0, dsum[rows, prev], 0.0)
    return partial, deriv, ok


def p1_series_small(params: Params, rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Small-rho series of p_1.

    Returns:
        (values, ok mask)
    """
    d, alpha = params.d, params.alpha
    rho = np.asarray(rho, dtype=float)
    k = np.arange(SERIES_TERMS, dtype=float)
    log_coef = log_gamma((2.0 * k + d) / alpha) - log_gamma(k + 1.0) - log_gamma(k + d / 2.0)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    prefactor = 1.0 / (2.0 ** (d - 1) * math.pi ** (d / 2.0) * alpha)

    values = np.zeros_like(rho)
    ok = np.zeros(rho.shape, dtype=bool)

    at_zero = rho == 0
    values[at_zero] = prefactor * math.exp(log_coef[0])
    ok[at_zero] = True

    pos = ~at_zero
    if np.any(pos):
        log_terms = log_coef[None, :] + 2.0 * k[None, :] * np.log(rho[pos] / 2.0)[:, None]
        overflow = np.any(log_terms > LOG_OVERFLOW, axis=1)
        terms = sign * np.exp(np.minimum(log_terms, LOG_OVERFLOW))
        partial, _, good = _accept_series(terms)
        values[pos] = prefactor * partial
        ok[pos] = good & ~overflow
    return values, ok


def _large_coefficients(params: Params) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """k, log|a_k| and sign(a_k) of the large-rho expansion (without pi^{-d/2-1})."""
    d, alpha = params.d, params.alpha
    k = np.arange(1, SERIES_TERMS + 1, dtype=float)
    sines = np.sin(math.pi * k * alpha / 2.0)
    # exact zeros of the sine (e.g. alpha = 1, even k)
    sines = np.where(np.abs(sines) < 1e-14, 0.0, sines)
    with np.errstate(divide="ignore"):
        log_coef = (
            k * alpha * math.log(2.0)
            + log_gamma((k * alpha + d) / 2.0)
            + log_gamma(1.0 + k * alpha / 2.0)
            - log_gamma(k + 1.0)
            + np.log(np.abs(sines))
        )
    sign = np.where(k % 2 == 1, 1.0, -1.0) * np.sign(sines)
    return k, log_coef, sign


def large_series_coefficient(params: Params, k: int) -> float:
    """Coefficient a_k of rho^{-k alpha - d} in the large-rho expansion of p_1."""
    d, alpha = params.d, params.alpha
    value = (
        (-1.0) ** (k + 1) / math.factorial(k)
        * 2.0 ** (k * alpha)
        * math.exp(float(log_gamma((k * alpha + d) / 2.0)) + float(log_gamma(1.0 + k * alpha / 2.0)))
        * math.sin(math.pi * k * alpha / 2.0)
    )
    return value / math.pi ** (d / 2.0 + 1.0)


def p1_series_large(params: Params, rho: np.ndarray, with_derivative: bool = False):
    """
    Large-rho expansion of p_1 (convergent for alpha < 1, asymptotic above).

    Returns:
        (values, derivatives or None, ok mask)
    """
    d, alpha = params.d, params.alpha
    rho = np.asarray(rho, dtype=float)
    prefactor = math.pi ** (-d / 2.0 - 1.0)
    k, log_coef, sign = _large_coefficients(params)

    values = np.zeros_like(rho)
    derivs = np.zeros_like(rho) if with_derivative else None
    ok = np.zeros(rho.shape, dtype=bool)
    pos = rho > 0
    if not np.any(pos):
        return values, derivs, ok

    log_rho = np.log(rho[pos])
    exponents = k * alpha + d
    log_terms = log_coef[None, :] - exponents[None, :] * log_rho[:, None]
    overflow = np.any(log_terms > LOG_OVERFLOW, axis=1)
    terms = sign * np.exp(np.minimum(log_terms, LOG_OVERFLOW))
    dterms = -exponents[None, :] * terms / rho[pos][:, None] if with_derivative else None

    partial, deriv, good = _accept_series(terms, dterms)
    values[pos] = prefactor * partial
    if with_derivative:
        derivs[pos] = prefactor * deriv
    ok[pos] = good & ~overflow
    return values, derivs, ok


def _hankel_integrand(d: int, alpha: float, rho: float) -> Callable[[np.ndarray], np.ndarray]:
    if d == 1:
        return lambda s: np.exp(-np.power(s, alpha)) * np.cos(s * rho) / math.pi
    if d == 2:
        return lambda s: s * np.exp(-np.power(s, alpha)) * special.j0(s * rho) / (2.0 * math.pi)
    return lambda s: s * np.exp(-np.power(s, alpha)) * np.sin(s * rho) / (2.0 * math.pi ** 2 * rho)


def p1_fourier_inversion(params: Params, rho: float) -> Tuple[float, float]:
    """
    p_1(rho) by radial Fourier inversion of exp(-|xi|^alpha).

    The first half-period (which holds the s^alpha cusp at 0) goes to adaptive
    quadrature, the remaining half-periods to 48-point Gauss-Legendre.

    Args:
        params: Problem parameters
        rho: Radius > 0

    Returns:
        (value, error estimate)
    """
    if not rho > 0:
        raise DomainError("p1_fourier_inversion requires rho > 0")
    d, alpha = params.d, params.alpha
    f = _hankel_integrand(d, alpha, rho)
    s_max = EXP_CUTOFF ** (1.0 / alpha)
    half_period = math.pi / rho

    head_end = min(s_max, half_period)
    head = radial_quad(lambda s: float(f(np.array(s))), 0.0, head_end, breakpoints=[1.0],
                       epsabs=1e-15, epsrel=1e-13, limit=400, decades=False)
    value, error = head.value, head.error

    if head_end < s_max:
        edges = np.arange(head_end, s_max, half_period)
        edges = np.append(edges, s_max)
        lo, hi = edges[:-1], edges[1:]
        mid = 0.5 * (lo + hi)[:, None]
        half = 0.5 * (hi - lo)[:, None]
        nodes = mid + half * GL_NODES[None, :]
        value += float(np.sum(half * (f(nodes) * GL_WEIGHTS[None, :])))
    return value, error


def p1_radial(params: Params, rho) -> np.ndarray:
    """
    p_1 at radii rho (vectorized), alpha = 1 in closed form.

    Args:
        params: Problem parameters
        rho: Radii >= 0

    Returns:
        Array of density values
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if params.alpha == 1.0:
        return cauchy_profile(params.d, rho, 1.0)

    values, done = p1_series_small(params, rho)
    rest = ~done
    if np.any(rest):
        large_vals, _, large_ok = p1_series_large(params, rho[rest])
        idx = np.flatnonzero(rest)
        values[idx[large_ok]] = large_vals[large_ok]
        done[idx[large_ok]] = True

    remaining = np.flatnonzero(~done)
    if len(remaining):
        logger.debug(f"p_1 inversion quadrature at {len(remaining)} radii (d={params.d}, alpha={params.alpha})")
    for i in remaining:
        values[i], _ = p1_fourier_inversion(params, float(rho[i]))
    return values


@dataclass(eq=False)
class RadialProfile:
    """
    Cubic-spline radial profile on [0, rho_max] with an analytic tail beyond.
    """

    grid: np.ndarray
    values: np.ndarray
    tail: Callable[[np.ndarray], np.ndarray]
    tail_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    tail_exponent: float = 0.0
    tail_coefficient: float = 0.0
    spline: CubicSpline = field(init=False, repr=False)
    spline_derivative: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        if np.any(np.diff(self.grid) <= 0):
            raise DomainError("RadialProfile grid must be strictly increasing")
        self.spline = CubicSpline(self.grid, self.values, bc_type=((1, 0.0), "not-a-knot"))
        self.spline_derivative = self.spline.derivative()

    @property
    def rho_max(self) -> float:
        return float(self.grid[-1])

    def _split(self, rho, inner: Callable, outer: Callable):
        arr = np.asarray(rho, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        out = np.empty_like(flat)
        inside = flat <= self.rho_max
        if np.any(inside):
            out[inside] = inner(flat[inside])
        if np.any(~inside):
            out[~inside] = outer(flat[~inside])
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def __call__(self, rho):
        return self._split(rho, self.spline, self.tail)

    def derivative(self, rho):
        if self.tail_derivative is None:
            raise DomainError("profile has no tail derivative")
        return self._split(rho, self.spline_derivative, self.tail_derivative)


def profile_grid(nodes: int = PROFILE_NODES, rho_max: float = PROFILE_RHO_MAX) -> np.ndarray:
    """Node set {0} U geometric grid on [1e-3, rho_max]."""
    return np.concatenate([[0.0], np.geomspace(PROFILE_RHO_MIN, rho_max, nodes - 1)])


def _p1_tail_functions(params: Params):
    leading = params.c_dalpha
    exponent = params.d + params.alpha

    def tail(rho):
        values, _, ok = p1_series_large(params, rho)
        return np.where(ok, values, leading * np.power(rho, -exponent))

    def tail_derivative(rho):
        _, derivs, ok = p1_series_large(params, rho, with_derivative=True)
        return np.where(ok, derivs, -exponent * leading * np.power(rho, -exponent - 1.0))

    return tail, tail_derivative


def p1_tail_mass(params: Params, w: float) -> float:
    """
    int_w^inf p_1(u) u^{d-1} du, the radial mass of p_1 beyond w (per unit sphere area).

    alpha = 1 is the Cauchy density in closed form. Otherwise the large-rho
    series is integrated term by term, sum_k a_k w^{-k alpha} / (k alpha);
    where that series is not usable the leading term c_{d,alpha} w^{-alpha} / alpha
    is returned, so w should lie beyond the tabulated profile.
    """
    d, alpha = params.d, params.alpha
    if not w > 0:
        raise DomainError(f"p_1 tail mass needs w > 0, got {w}")
    if alpha == 1.0:
        const = math.gamma((d + 1) / 2.0) / math.pi ** ((d + 1) / 2.0)
        return const * poisson_tail_mass(d, 1.0, w)

    k, log_coef, sign = _large_coefficients(params)
    log_terms = log_coef - k * alpha * math.log(w) - np.log(k * alpha)
    terms = sign * np.exp(np.minimum(log_terms, LOG_OVERFLOW))
    partial, _, ok = _accept_series(terms[None, :])
    if ok[0] and np.all(log_terms <= LOG_OVERFLOW):
        return float(math.pi ** (-d / 2.0 - 1.0) * partial[0])
    return params.c_dalpha * w ** (-alpha) / alpha


def build_p1_profile(params: Params, nodes: int = PROFILE_NODES, rho_max: float = PROFILE_RHO_MAX,
                     values: Optional[np.ndarray] = None) -> RadialProfile:
    """
    Tabulate p_1 on the profile grid and wrap it as a RadialProfile.

    Args:
        params: Problem parameters
        nodes: Number of grid nodes
        rho_max: Last grid radius
        values: Precomputed node values (from the on-disk cache)
    """
    grid = profile_grid(nodes, rho_max)
    if values is None:
        values = p1_radial(params, grid)
    tail, tail_derivative = _p1_tail_functions(params)
    return RadialProfile(
        grid=grid,
        values=np.asarray(values, dtype=float),
        tail=tail,
        tail_derivative=tail_derivative,
        tail_exponent=params.d + params.alpha,
        tail_coefficient=params.c_dalpha,
    )


def _cache_header(params: Params, nodes: int, rho_max: float) -> str:
    return (f"fraclap-profile v{GRID_VERSION} d={params.d} alpha={params.alpha!r} "
            f"nodes={nodes} rho_max={rho_max!r}")


def _cache_file(cache_dir: Path, params: Params, nodes: int) -> Path:
    return cache_dir / f"p1_d{params.d}_a{params.alpha!r}_n{nodes}_v{GRID_VERSION}.txt"


def load_cached_values(cache_dir: Path, params: Params, nodes: int, rho_max: float) -> Optional[np.ndarray]:
    """
    Read node values from the on-disk table if its header matches.

    Returns:
        Values or None when absent or stale
    """
    path = _cache_file(cache_dir, params, nodes)
    if not path.exists():
        return None
    try:
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().lstrip("#").strip()
        if header != _cache_header(params, nodes, rho_max):
            logger.info(f"Profile cache header mismatch, regenerating: {path}")
            return None
        table = np.loadtxt(path, comments="#", ndmin=2)
    except (OSError, ValueError) as e:
        logger.warning(f"Unreadable profile cache {path}: {e}")
        return None
    if table.shape != (nodes, 2) or not np.allclose(table[:, 0], profile_grid(nodes, rho_max), rtol=1e-15, atol=0):
        return None
    return table[:, 1]


def save_cached_values(cache_dir: Path, profile: RadialProfile, params: Params) -> Path:
    """Write the profile table with a versioned header."""
    cache_dir.mkdir(parents=True, exist_ok=True)
    nodes = len(profile.grid)
    path = _cache_file(cache_dir, params, nodes)
    np.savetxt(
        path,
        np.column_stack([profile.grid, profile.values]),
        fmt="%.17e",
        header=_cache_header(params, nodes, profile.rho_max),
        comments="# ",
    )
    return path


_PROFILE_CACHE: Dict[Tuple[int, float, int, float], RadialProfile] = {}
_PROFILE_LOCK = threading.Lock()


def get_p1_profile(params: Params, nodes: int = PROFILE_NODES, rho_max: float = PROFILE_RHO_MAX,
                   cache_dir: Optional[str] = None) -> RadialProfile:
    """
    Process-wide p_1 profile for (d, alpha), built once under a lock.

    Args:
        params: Problem parameters
        nodes: Grid size
        rho_max: Grid end
        cache_dir: Optional directory for the on-disk table

    Returns:
        Shared immutable RadialProfile
    """
    key = (params.d, params.alpha, nodes, rho_max)
    profile = _PROFILE_CACHE.get(key)
    if profile is not None:
        return profile

    with _PROFILE_LOCK:
        profile = _PROFILE_CACHE.get(key)
        if profile is not None:
            return profile

        values = None
        if cache_dir:
            values = load_cached_values(Path(cache_dir), params, nodes, rho_max)
            if values is not None:
                logger.debug(f"Loaded p_1 profile from cache (d={params.d}, alpha={params.alpha})")

        profile = build_p1_profile(params, nodes, rho_max, values)
        if cache_dir and values is None:
            path = save_cached_values(Path(cache_dir), profile, params)
            logger.debug(f"Saved p_1 profile to {path}")

        _PROFILE_CACHE[key] = profile
        return profile


def clear_profile_cache() -> None:
    """Drop all in-memory profiles."""
    with _PROFILE_LOCK:
        _PROFILE_CACHE.clear()


def pt_profile(params: Params, rho, t: float, profile: Optional[RadialProfile] = None):
    """p_t as a function of radius: t^{-d/alpha} p_1(t^{-1/alpha} rho)."""
    if not t > 0:
        raise DomainError(f"p_t requires t > 0, got {t}")
    if params.alpha == 1.0:
        return cauchy_profile(params.d, np.asarray(rho, dtype=float), t)
    profile = profile or get_p1_profile(params)
    scale = t ** (-1.0 / params.alpha)
    return t ** (-params.d / params.alpha) * np.asarray(profile(np.asarray(rho, dtype=float) * scale))


def kernel_pt(params: Params, z, t: float):
    """
    Stable density p_t(z) with Fourier transform exp(-t |xi|^alpha).

    Args:
        params: Problem parameters
        z: Point(s)
        t: Time > 0

    Returns:
        Density value(s)
    """
    rho = radius(z, params.d)
    value = pt_profile(params, rho, t)
    return np.asarray(value).item() if np.ndim(rho) == 0 else value
