"""
Bochner subordination (B) and Balakrishnan's resolvent formula (BB).

Both are outer integrals over a semigroup or resolvent parameter of an inner
radial average. The outer integrals are split at 1; the piece over (1, inf)
is mapped to (0, 1) by the reciprocal substitution. Algebraic endpoint
behaviour goes to QUADPACK's QAWS weights.
"""

import math
from typing import Callable, Dict, Optional

import numpy as np
from scipy import integrate

from ..kernels.params import Params
from ..kernels.radial import radial_quad
from ..specfun.bessel import bessel_k
from ..specfun.gamma import gamma
from ..testbank.functions import TestFunction
from ..utils.logger import get_logger
from .common import SphericalProfile, feature_radii, point, require_admissible, resolve_settings, rule_for
from .settings import EvalSettings
from .types import EvalReport

logger = get_logger(__name__)

HEAT_CUTOFF = 7.0
RESOLVENT_CUTOFF = 60.0
OUTER_EPSREL = 1e-10
OUTER_LIMIT = 200
# outer endpoints are replaced by nearby interior points
NEAR_ZERO = 1e-8
FAR_PARAMETER = 1e12


def heat_average(params: Params, f: TestFunction, x: np.ndarray, t: float, prof: SphericalProfile) -> float:
    """
    P_t f(x) - f(x) = pi^{-d/2} int_0^7 e^{-w^2} w^{d-1} (S(2 sqrt(t) w) - sigma f(x)) dw.
    """
    d = params.d
    scale = 2.0 * math.sqrt(t)
    breakpoints = [k / scale for k in feature_radii(f, x)] + [1.0 / scale, 10.0 / scale, 1.0, 3.0]

    def integrand(w):
        return math.exp(-w * w) * w ** (d - 1) * prof.centred(scale * w)

    result = radial_quad(integrand, 0.0, HEAT_CUTOFF, breakpoints, epsabs=1e-15 * min(1.0, t),
                         epsrel=1e-12, decades=False)
    return math.pi ** (-d / 2.0) * result.value


def resolvent_weight(d: int) -> Callable[[float], float]:
    """g_d(w) with s (sI - Laplacian)^{-1} = g_d(sqrt(s)|z|) in the variable w = sqrt(s)|z|."""
    if d == 1:
        return lambda w: 0.5 * math.exp(-w)
    if d == 2:
        return lambda w: float(bessel_k(0.0, w)) / (2.0 * math.pi) if w > 0 else 0.0
    return lambda w: math.exp(-w) / (4.0 * math.pi * w) if w > 0 else 0.0


def resolvent_average(params: Params, f: TestFunction, x: np.ndarray, s: float, prof: SphericalProfile) -> float:
    """s (sI - Laplacian)^{-1} f(x) - f(x) = int_0^60 g_d(w) w^{d-1} (S(w / sqrt s) - sigma f(x)) dw."""
    d = params.d
    root = math.sqrt(s)
    weight = resolvent_weight(d)
    breakpoints = [k * root for k in feature_radii(f, x)] + [root, 10.0 * root, 1.0, 10.0]

    def integrand(w):
        return weight(w) * w ** (d - 1) * prof.centred(w / root)

    result = radial_quad(integrand, 0.0, RESOLVENT_CUTOFF, breakpoints, epsabs=1e-15 * min(1.0, 1.0 / s),
                         epsrel=1e-12, decades=False)
    return result.value


def _qaws(func: Callable[[float], float], exponent: float) -> Dict[str, object]:
    result = integrate.quad(func, 0.0, 1.0, weight="alg", wvar=(exponent, 0.0),
                            epsabs=1e-13, epsrel=OUTER_EPSREL, limit=OUTER_LIMIT, full_output=1)
    return {"value": result[0], "error": result[1], "ok": len(result) < 4}


def _outer_report(method: str, pieces, factor: float, diagnostics: Dict) -> EvalReport:
    value = factor * sum(p["value"] for p in pieces)
    error = abs(factor) * sum(p["error"] for p in pieces)
    ok = all(p["ok"] for p in pieces)
    if not ok:
        logger.warning(f"{method}: outer quadrature reported a warning (error {error:.2e})")
    converged = ok or error <= 1e-6 * max(1.0, abs(value))
    return EvalReport(value, error, method, converged=converged, diagnostics=diagnostics)


def op_bochner(params: Params, f: TestFunction, x, settings: Optional[EvalSettings] = None) -> EvalReport:
    """
    (1/|Gamma(-alpha/2)|) int_0^inf (P_t f(x) - f(x)) t^{-1-alpha/2} dt.

    (0, 1): h(t) = (P_t f - f)/t is smooth, weight t^{-alpha/2}.
    (1, inf): t = 1/u, integrand (P_{1/u} f - f) u^{alpha/2 - 1}.
    """
    require_admissible(params, f, "B")
    settings = resolve_settings(settings)
    x = point(params, x)
    alpha = params.alpha
    prof = SphericalProfile(params, f, x, rule_for(params, settings))

    def small_time(t):
        t = max(t, NEAR_ZERO)
        return heat_average(params, f, x, t, prof) / t

    def large_time(u):
        return heat_average(params, f, x, min(1.0 / u, FAR_PARAMETER) if u > 0 else FAR_PARAMETER, prof)

    pieces = [_qaws(small_time, -alpha / 2.0), _qaws(large_time, alpha / 2.0 - 1.0)]
    return _outer_report("B", pieces, 1.0 / abs(gamma(-alpha / 2.0)),
                         {"function_evaluations": prof.calls})


def op_balakrishnan(params: Params, f: TestFunction, x, settings: Optional[EvalSettings] = None) -> EvalReport:
    """
    (sin(alpha pi/2)/pi) int_0^inf (s (sI - Laplacian)^{-1} f(x) - f(x)) s^{alpha/2 - 1} ds.

    (0, 1): weight s^{alpha/2 - 1}.
    (1, inf): s = 1/u, integrand (inner(1/u) / u) u^{-alpha/2} with inner(1/u)/u -> Laplacian f(x).
    """
    require_admissible(params, f, "BB")
    settings = resolve_settings(settings)
    x = point(params, x)
    alpha = params.alpha
    prof = SphericalProfile(params, f, x, rule_for(params, settings))

    def small_s(s):
        return resolvent_average(params, f, x, max(s, 1.0 / FAR_PARAMETER), prof)

    def large_s(u):
        u = max(u, NEAR_ZERO)
        return resolvent_average(params, f, x, 1.0 / u, prof) / u

    pieces = [_qaws(small_s, alpha / 2.0 - 1.0), _qaws(large_s, -alpha / 2.0)]
    return _outer_report("BB", pieces, math.sin(alpha * math.pi / 2.0) / math.pi,
                         {"function_evaluations": prof.calls})
