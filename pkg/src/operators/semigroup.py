"""
Semigroup (S) and harmonic-extension (H) definitions.

Both average f against a radial probability kernel at scale s and divide by
the time (or height):

    S: (1/t) int p_1(w) w^{d-1} (S(t^{1/alpha} w) - sigma f(x)) dw
    H: (c_{d,alpha} c_alpha / y) int w^{d-1} (1 + w^2)^{-(d+alpha)/2} (S(s_y w) - sigma f(x)) dw,
       s_y = (y / c_alpha)^{1/alpha}
"""

import math
from typing import Callable, Dict, Optional

import numpy as np

from ..kernels.params import Params
from ..kernels.kernels import poisson_tail_mass
from ..kernels.radial import radial_quad
from ..kernels.stable_density import PROFILE_RHO_MAX, get_p1_profile, p1_tail_mass, pt_profile
from ..testbank.functions import TestFunction
from .common import (
    DECAYING,
    SphericalProfile,
    feature_radii,
    ladder_report,
    point,
    require_admissible,
    resolve_settings,
    rule_for,
)
from .settings import EvalSettings
from .types import EvalReport


def _scaled_average(params: Params, f: TestFunction, x: np.ndarray, kernel: Callable[[float], float],
                    tail_mass: Callable[[float], float], scale: float, prof: SphericalProfile,
                    epsabs: float) -> Dict[str, float]:
    """
    int_0^inf kernel(w) w^{d-1} (S(scale w) - sigma f(x)) dw.

    For decaying f the range is cut at W, past the radius where f becomes
    negligible. Beyond W the integrand splits into kernel * S, integrated
    numerically, and -sigma f(x) times the kernel's tail mass beyond W, taken
    in closed form. The kernels decay only like w^{-d-alpha}, so the second
    piece is O(t) and carries the far-field part of the limit.
    """
    d = params.d
    radii = feature_radii(f, x)
    breakpoints = [k / scale for k in radii] + [1.0 / scale, 1.0, PROFILE_RHO_MAX]

    if f.decay.kind not in DECAYING:
        def integrand(w):
            return kernel(w) * w ** (d - 1) * prof.centred(scale * w)

        result = radial_quad(integrand, 0.0, math.inf, breakpoints, epsabs=epsabs, epsrel=1e-11)
        return {"value": result.value, "error": result.error, "ok": result.ok}

    far = max(radii + [1.0])
    cut = max(PROFILE_RHO_MAX, far / scale)

    def near_integrand(w):
        return kernel(w) * w ** (d - 1) * prof.centred(scale * w)

    def far_integrand(w):
        return kernel(w) * w ** (d - 1) * prof(scale * w)

    near = radial_quad(near_integrand, 0.0, cut, breakpoints, epsabs=epsabs, epsrel=1e-11)
    outer = radial_quad(far_integrand, cut, math.inf, [2.0 * cut, 10.0 * cut], epsabs=epsabs, epsrel=1e-11)
    tail = -prof.sigma_fx * tail_mass(cut)
    return {
        "value": near.value + outer.value + tail,
        "error": near.error + outer.error,
        "ok": near.ok and outer.ok,
    }


def semigroup_value(params: Params, f: TestFunction, x, t: float, settings: Optional[EvalSettings] = None,
                    prof: Optional[SphericalProfile] = None) -> Dict[str, float]:
    """(P_t f(x) - f(x)) / t at a single time."""
    settings = resolve_settings(settings)
    x = point(params, x)
    prof = prof or SphericalProfile(params, f, x, rule_for(params, settings))
    profile = None if params.alpha == 1.0 else get_p1_profile(params)

    def kernel(w):
        return float(pt_profile(params, w, 1.0, profile))

    def tail_mass(w):
        return p1_tail_mass(params, w)

    avg = _scaled_average(params, f, x, kernel, tail_mass, t ** (1.0 / params.alpha), prof,
                          1e-3 * settings.abs_tol * t)
    return {"value": avg["value"] / t, "error": avg["error"] / t, "ok": avg["ok"]}


def harmonic_value(params: Params, f: TestFunction, x, y: float, settings: Optional[EvalSettings] = None,
                   prof: Optional[SphericalProfile] = None) -> Dict[str, float]:
    """(Q_y f(x) - f(x)) / y at a single height, q_y in closed form."""
    settings = resolve_settings(settings)
    x = point(params, x)
    prof = prof or SphericalProfile(params, f, x, rule_for(params, settings))
    d, alpha = params.d, params.alpha
    const = params.c_dalpha * params.c_alpha

    def kernel(w):
        return const * (1.0 + w * w) ** (-(d + alpha) / 2.0)

    scale = (y / params.c_alpha) ** (1.0 / alpha)

    def tail_mass(w):
        return const * poisson_tail_mass(d, alpha, w)

    avg = _scaled_average(params, f, x, kernel, tail_mass, scale, prof, 1e-3 * settings.abs_tol * y)
    return {"value": avg["value"] / y, "error": avg["error"] / y, "ok": avg["ok"]}


def _ladder(method: str, params: Params, f: TestFunction, x, settings: EvalSettings, scales, single) -> EvalReport:
    x = point(params, x)
    prof = SphericalProfile(params, f, x, rule_for(params, settings))
    values, error, ok = [], 0.0, True
    for s in scales:
        result = single(params, f, x, s, settings, prof)
        values.append(result["value"])
        error = max(error, result["error"])
        ok = ok and result["ok"]
    return ladder_report(method, params, scales, values, settings,
                         {"function_evaluations": prof.calls}, quad_error=error, quad_ok=ok)


def op_semigroup(params: Params, f: TestFunction, x, settings: Optional[EvalSettings] = None) -> EvalReport:
    """
    Semigroup definition, extrapolated in t -> 0 on t_k = t_0 4^{-k}.

    Raises:
        AdmissibilityError: For growth faster than the stable tails allow
    """
    require_admissible(params, f, "S")
    settings = resolve_settings(settings)
    return _ladder("S", params, f, x, settings, settings.semigroup_ladder(), semigroup_value)


def op_harmonic(params: Params, f: TestFunction, x, settings: Optional[EvalSettings] = None) -> EvalReport:
    """Harmonic-extension definition, extrapolated in y -> 0 on y_k = y_0 4^{-k}."""
    require_admissible(params, f, "H")
    settings = resolve_settings(settings)
    return _ladder("H", params, f, x, settings, settings.harmonic_ladder(), harmonic_value)
