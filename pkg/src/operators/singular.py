"""
Kernel-integral definitions: the principal value (I), its compensated and
symmetrized variants, and the Dynkin characteristic operator (D).

All four reduce to radial integrals of the spherical sum S(rho) about x.
"""

import math
from typing import Dict, List, Optional

import numpy as np
from scipy import integrate

from ..kernels.params import Params
from ..kernels.radial import radial_quad
from ..testbank.functions import TestFunction
from ..utils.logger import get_logger
from .common import (
    SphericalProfile,
    exterior_integral,
    feature_radii,
    ladder_report,
    point,
    require_admissible,
    resolve_settings,
    rule_for,
)
from .settings import EvalSettings
from .types import EvalReport

logger = get_logger(__name__)

SMOOTHNESS_TOL = 1e-2
RUNG_ERROR_FRACTION = 1e-3
# finest scales whose quadrature error enters the D estimate
FIT_TAIL = 7


def singular_partial_values(params: Params, f: TestFunction, x, settings: Optional[EvalSettings] = None,
                            ladder: Optional[List[float]] = None) -> Dict[str, object]:
    """
    Truncated principal values int_{|z| > r_k} (f(x+z) - f(x)) nu(z) dz on the ladder.

    The exterior of the coarsest ball is integrated once; each finer value adds
    the shell [r_{k+1}, r_k].

    Returns:
        Dict with scales, values, summed quadrature error and ok flag
    """
    settings = resolve_settings(settings)
    x = point(params, x)
    ladder = ladder or settings.singular_ladder()
    prof = SphericalProfile(params, f, x, rule_for(params, settings))
    c, alpha = params.c_dalpha, params.alpha
    kinks = feature_radii(f, x)

    def integrand(rho):
        return c * rho ** (-1.0 - alpha) * prof.centred(rho)

    exterior = exterior_integral(params, f, integrand, ladder[0], prof.fx, settings, kinks)
    running = exterior["value"]
    error = exterior["error"]
    ok = exterior["ok"]
    values = [running]
    for outer, inner in zip(ladder[:-1], ladder[1:]):
        shell = radial_quad(integrand, inner, outer, kinks, epsabs=1e-14, epsrel=1e-11, decades=False)
        running += shell.value
        error += shell.error
        ok = ok and shell.ok
        values.append(running)
    return {"scales": list(ladder), "values": values, "error": error, "ok": ok, "calls": prof.calls}


def op_singular(params: Params, f: TestFunction, x, settings: Optional[EvalSettings] = None) -> EvalReport:
    """
    Principal-value singular integral, extrapolated in r -> 0.

    Args:
        params: Problem parameters
        f: Test function
        x: Evaluation point
        settings: Tolerances and ladder

    Returns:
        EvalReport tagged 'I'
    """
    require_admissible(params, f, "I")
    settings = resolve_settings(settings)
    partial = singular_partial_values(params, f, x, settings)
    return ladder_report("I", params, partial["scales"], partial["values"], settings,
                         {"function_evaluations": partial["calls"]},
                         quad_error=partial["error"], quad_ok=partial["ok"])


def _small_ball_correction(params: Params, second_difference, rho_c: float) -> Dict[str, float]:
    """
    int_0^{rho_c} c rho^{-1-alpha} D(rho) d rho for D(rho) = A0 rho^2 + A1 rho^4 + ...,
    with A0, A1 from D at rho_c and rho_c / 2.
    """
    c, alpha = params.c_dalpha, params.alpha
    a_outer = second_difference(rho_c) / rho_c ** 2
    a_inner = second_difference(rho_c / 2.0) / (rho_c / 2.0) ** 2
    a1 = (a_outer - a_inner) / (0.75 * rho_c ** 2)
    a0 = a_outer - a1 * rho_c ** 2
    smooth = abs(a_outer - a_inner) <= SMOOTHNESS_TOL * max(abs(a_outer), abs(a_inner)) + 1e-8
    value = c * (a0 * rho_c ** (2.0 - alpha) / (2.0 - alpha) + a1 * rho_c ** (4.0 - alpha) / (4.0 - alpha))
    error = c * abs(a1) * rho_c ** (4.0 - alpha) / (4.0 - alpha)
    return {"value": value, "error": error, "smooth": smooth}


def _absolute_report(method: str, params: Params, f: TestFunction, x: np.ndarray, settings: EvalSettings,
                     prof: SphericalProfile, near_difference, diagnostics: Dict) -> EvalReport:
    c, alpha = params.c_dalpha, params.alpha
    rho_c = settings.inner_radius
    kinks = feature_radii(f, x) + [1.0]

    def integrand(rho):
        return c * rho ** (-1.0 - alpha) * near_difference(rho)

    correction = _small_ball_correction(params, near_difference, rho_c)
    main = exterior_integral(params, f, integrand, rho_c, prof.fx, settings, kinks)
    value = main["value"] + correction["value"]
    error = main["error"] + correction["error"]
    converged = main["ok"] and correction["smooth"]
    diagnostics = dict(diagnostics)
    diagnostics.update({"inner_radius": rho_c, "small_ball_term": correction["value"],
                        "smooth_at_x": correction["smooth"], "function_evaluations": prof.calls})
    if not correction["smooth"]:
        logger.warning(f"{method}: f is not smooth inside the cut-off ball at x={x.tolist()}")
    return EvalReport(value, error, method, converged=converged, diagnostics=diagnostics)


def op_singular_compensated(params: Params, f: TestFunction, x,
                            settings: Optional[EvalSettings] = None) -> EvalReport:
    """
    int (f(x+z) - f(x) - grad f(x).z 1_{|z|<1}) nu(z) dz, absolutely convergent.

    The gradient comes from f when supplied, else central differences; the
    source is recorded in the diagnostics.
    """
    require_admissible(params, f, "I-compensated")
    settings = resolve_settings(settings)
    x = point(params, x)
    rule = rule_for(params, settings)
    prof = SphericalProfile(params, f, x, rule)
    grad, source = f.grad(x, step=settings.gradient_step)
    slopes = rule.directions @ grad

    def difference(rho):
        values = prof.directional(rho) - prof.fx
        if rho < 1.0:
            values = values - rho * slopes
        return float(values @ rule.weights)

    return _absolute_report("I-compensated", params, f, x, settings, prof, difference,
                            {"gradient_source": source})


def op_singular_symmetrized(params: Params, f: TestFunction, x,
                            settings: Optional[EvalSettings] = None) -> EvalReport:
    """(1/2) int (f(x+z) + f(x-z) - 2 f(x)) nu(z) dz, absolutely convergent."""
    require_admissible(params, f, "I-symmetrized")
    settings = resolve_settings(settings)
    x = point(params, x)
    rule = rule_for(params, settings)
    prof = SphericalProfile(params, f, x, rule)
    directions = rule.directions

    def difference(rho):
        plus = prof.directional(rho)
        minus = np.asarray(f(x - rho * directions), dtype=float)
        return float((0.5 * (plus + minus) - prof.fx) @ rule.weights)

    return _absolute_report("I-symmetrized", params, f, x, settings, prof, difference, {})


def dynkin_value(params: Params, f: TestFunction, x: np.ndarray, r: float, prof: SphericalProfile,
                 settings: EvalSettings) -> Dict[str, float]:
    """
    int (f(x+z) - f(x)) nu-tilde_r(z) dz at one scale.

    Near the edge the factor (rho - r)^{-alpha/2} is an algebraic quadrature
    weight; the rest is integrated plainly up to the first feature radius
    past r and on to infinity.
    """
    c, alpha = params.c_dalpha, params.alpha
    kinks = feature_radii(f, x)
    inside = [k for k in kinks if r < k < 2.0 * r]
    edge_end = min(inside) if inside else 2.0 * r

    def smooth(rho):
        return c * (rho + r) ** (-alpha / 2.0) * prof.centred(rho) / rho

    def full(rho):
        return c * (rho * rho - r * r) ** (-alpha / 2.0) * prof.centred(rho) / rho

    result = integrate.quad(smooth, r, edge_end, weight="alg", wvar=(-alpha / 2.0, 0.0),
                            epsabs=1e-14, epsrel=1e-11, limit=200, full_output=1)
    near_value, near_err = result[0], result[1]
    near_ok = len(result) < 4
    far = exterior_integral(params, f, full, edge_end, prof.fx, settings, kinks)
    value = near_value + far["value"]
    error = near_err + far["error"]
    ok = near_ok and far["ok"] and math.isfinite(value) and error <= RUNG_ERROR_FRACTION * max(1.0, abs(value))
    return {"value": value, "error": error, "ok": ok}


def op_dynkin(params: Params, f: TestFunction, x, settings: Optional[EvalSettings] = None) -> EvalReport:
    """
    Dynkin characteristic operator, extrapolated in r -> 0.

    A scale whose edge integral fails its error budget marks the report as
    not converged. When every one of the finest scales fails there is no
    limit to extrapolate and the report carries value = error = inf.
    """
    require_admissible(params, f, "D")
    settings = resolve_settings(settings)
    x = point(params, x)
    prof = SphericalProfile(params, f, x, rule_for(params, settings))
    ladder = settings.singular_ladder()
    values, errors, failed = [], [], []
    for r in ladder:
        rung = dynkin_value(params, f, x, r, prof, settings)
        values.append(rung["value"])
        errors.append(rung["error"])
        if not rung["ok"]:
            failed.append(r)
    diagnostics = {"failed_scales": failed, "function_evaluations": prof.calls}
    if failed:
        logger.warning(f"D: edge integral failed at {len(failed)} scales (finest {min(failed):.3g})")

    tail = ladder[-FIT_TAIL:]
    if all(r in failed for r in tail):
        tail_errors = errors[-FIT_TAIL:]
        diagnostics.update({
            "divergent": True,
            "scales_visited": len(ladder),
            "partial_values": values,
            "rung_errors": errors,
            "error_growth": tail_errors[-1] / tail_errors[0] if tail_errors[0] > 0 else math.inf,
        })
        logger.warning(f"D: no limit, the finest {len(tail)} scales all failed")
        return EvalReport(math.inf, math.inf, "D", converged=False, diagnostics=diagnostics)

    quad_error = max(errors[-FIT_TAIL:]) if errors else 0.0
    return ladder_report("D", params, ladder, values, settings, diagnostics,
                         quad_error=quad_error, quad_ok=not failed)


def check_maximum_principle(params: Params, f: TestFunction, x,
                            settings: Optional[EvalSettings] = None) -> Dict[str, object]:
    """
    Sign check of the symmetrized integral at a global maximum of f.

    Returns:
        Row with value, bound (error estimate) and passed = value <= bound
    """
    report = op_singular_symmetrized(params, f, x, settings)
    passed = report.value <= report.error_estimate
    if not passed:
        logger.warning(f"Maximum principle violated for {f.name} at {np.asarray(x).tolist()}: {report.value:.3e}")
    return {"name": "maximum_principle", "function": f.name, "value": report.value,
            "bound": report.error_estimate, "passed": bool(passed)}
