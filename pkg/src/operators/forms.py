"""
Weak pairing (W) and the nonlocal Dirichlet form (Q).

Integrals over R^d are taken on the effective support box of the functions
with a composite Gauss-Legendre tensor rule; pointwise values of L come from
the absolutely convergent symmetrized integral or, for radial functions with
a Fourier profile, from radial inversion.
"""

import math
from typing import Dict, Optional, Tuple

import numpy as np

from ..kernels.params import Params
from ..kernels.radial import radial_fourier_inverse, radial_quad
from ..testbank.functions import TestFunction
from ..utils.errors import AdmissibilityError, DomainError
from ..utils.logger import get_logger
from ..utils.parallel import ordered_map
from .common import box_rule, feature_radii, require_admissible, resolve_settings, rule_for, support_box
from .fourier import op_fourier
from .settings import EvalSettings
from .singular import op_singular_symmetrized

logger = get_logger(__name__)

# (panels, nodes) per axis of the outer tensor rule
OUTER_RULES = {1: (8, 10), 2: (4, 8), 3: (2, 6)}
NEGLIGIBLE = 1e-14
CROSS_CHUNK = 512
PAIRING_TOL = 1e-5


def _outer_rule(params: Params, lo, hi, panels: Optional[int], nodes: Optional[int]):
    default_panels, default_nodes = OUTER_RULES[params.d]
    return box_rule(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float),
                    panels or default_panels, nodes or default_nodes)


def _has_profile(f: TestFunction) -> bool:
    return f.radial and f.fourier_profile is not None


def operator_values(params: Params, f: TestFunction, points: np.ndarray, mask: np.ndarray,
                    settings: EvalSettings, use_fourier: bool = False) -> Tuple[np.ndarray, np.ndarray, bool]:
    """
    L f at the masked points; unmasked points are left at zero.

    Returns:
        (values, error estimates, all converged)
    """
    evaluate = op_fourier if use_fourier else op_singular_symmetrized

    def one(p):
        report = evaluate(params, f, p, settings)
        return report.value, report.error_estimate, report.converged

    selected = [p for p in points[mask]]
    results = ordered_map(one, selected, settings.threads)
    values = np.zeros(len(points))
    values[mask] = [r[0] for r in results]
    errors = np.zeros(len(points))
    errors[mask] = [r[1] for r in results]
    converged = all(r[2] for r in results)
    return values, errors, converged


def _paired(params: Params, f: TestFunction, weight_fn: TestFunction, settings: EvalSettings,
            use_fourier: bool, panels: Optional[int], nodes: Optional[int], method: str) -> Dict[str, float]:
    """int (L f)(y) weight_fn(y) dy over the support box of weight_fn."""
    lo, hi = support_box(weight_fn, method)
    points, weights = _outer_rule(params, lo, hi, panels, nodes)
    density = np.asarray(weight_fn(points), dtype=float) * weights
    mask = np.abs(density) > NEGLIGIBLE
    values, errors, converged = operator_values(params, f, points, mask, settings, use_fourier)
    bound = float(np.abs(density) @ errors)
    return {"value": float(values @ density), "error": bound, "converged": converged, "nodes": int(mask.sum())}


def cross_term(params: Params, f: TestFunction, phi: TestFunction, panels: Optional[int] = None,
               nodes: Optional[int] = None) -> float:
    """int int f(w) phi(y) nu(y - w) dw dy for disjoint supports."""
    f_points, f_weights = _outer_rule(params, *support_box(f, "W"), panels, nodes)
    p_points, p_weights = _outer_rule(params, *support_box(phi, "W"), panels, nodes)
    f_mass = np.asarray(f(f_points), dtype=float) * f_weights
    p_mass = np.asarray(phi(p_points), dtype=float) * p_weights
    total = 0.0
    for start in range(0, len(p_points), CROSS_CHUNK):
        block = p_points[start:start + CROSS_CHUNK]
        dist = np.linalg.norm(block[:, None, :] - f_points[None, :, :], axis=-1)
        total += float(p_mass[start:start + CROSS_CHUNK] @ (dist ** (-params.d - params.alpha)) @ f_mass)
    return params.c_dalpha * total


def _disjoint(f: TestFunction, phi: TestFunction) -> bool:
    gap = float(np.linalg.norm(f.center - phi.center))
    return math.isfinite(f.support_radius) and math.isfinite(phi.support_radius) and \
        f.decay.kind == "compact" and phi.decay.kind == "compact" and gap > f.support_radius + phi.support_radius


def op_weak_pairing(params: Params, f: TestFunction, phi: TestFunction, settings: Optional[EvalSettings] = None,
                    panels: Optional[int] = None, nodes: Optional[int] = None) -> Dict[str, object]:
    """
    Compare int (L f) phi with int f (L phi).

    L f comes from the symmetrized integral on the support box of phi; L phi
    from radial inversion when phi has a Fourier profile. When f is phi the
    same values serve both sides. For bumps with disjoint supports the common
    value is also checked against the direct double integral of f phi nu.

    Returns:
        Row with lhs, rhs, residual, error_estimate and passed
    """
    require_admissible(params, f, "W")
    require_admissible(params, phi, "W")
    settings = resolve_settings(settings)
    lhs = _paired(params, f, phi, settings, False, panels, nodes, "W")
    if f is phi:
        rhs = dict(lhs)
    else:
        rhs = _paired(params, phi, f, settings, _has_profile(phi), panels, nodes, "W")
    residual = abs(lhs["value"] - rhs["value"])
    row: Dict[str, object] = {
        "name": "weak_pairing", "function": f.name, "phi": phi.name,
        "lhs": lhs["value"], "rhs": rhs["value"], "residual": residual,
        "error_estimate": lhs["error"] + rhs["error"],
        "converged": bool(lhs["converged"] and rhs["converged"]),
    }
    if f is not phi and _disjoint(f, phi):
        cross = cross_term(params, f, phi, panels, nodes)
        row["cross_term"] = cross
        row["cross_residual"] = abs(lhs["value"] - cross)
    row["passed"] = bool(residual <= PAIRING_TOL and row["converged"])
    if not row["passed"]:
        logger.warning(f"Weak pairing {f.name}/{phi.name}: residual {residual:.2e}")
    return row


def _exit_lengths(y: np.ndarray, directions: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Distance from y along each direction to the boundary of the box."""
    with np.errstate(divide="ignore", invalid="ignore"):
        upper = np.where(directions > 0, (hi - y) / directions, np.inf)
        lower = np.where(directions < 0, (lo - y) / directions, np.inf)
    return np.min(np.minimum(upper, lower), axis=1)


def _form_density(params: Params, f: TestFunction, g: TestFunction, x: np.ndarray, lo: np.ndarray,
                  hi: np.ndarray, rule, settings: EvalSettings) -> Tuple[float, float, bool]:
    """(c/2) int_{R^d} (f(x+z) - f(x)) (g(x+z) - g(x)) |z|^{-d-alpha} dz."""
    c, alpha = params.c_dalpha, params.alpha
    fx, gx = f.value(x), g.value(x)
    reach = float(np.max(np.linalg.norm(np.stack(np.meshgrid(*zip(lo, hi), indexing="ij"), axis=-1)
                                         .reshape(-1, params.d) - x, axis=1)))

    def integrand(rho):
        pts = x + rho * rule.directions
        df = np.asarray(f(pts), dtype=float) - fx
        dg = np.asarray(g(pts), dtype=float) - gx
        return 0.5 * c * rho ** (-1.0 - alpha) * float((df * dg) @ rule.weights)

    breakpoints = feature_radii(f, x) + feature_radii(g, x)
    result = radial_quad(integrand, 0.0, reach, breakpoints, epsabs=1e-13, epsrel=1e-10)
    tail = 0.5 * c * params.sigma * fx * gx * reach ** (-alpha) / alpha
    return result.value + tail, result.error, result.ok


def op_form(params: Params, f: TestFunction, g: TestFunction, settings: Optional[EvalSettings] = None,
            panels: Optional[int] = None, nodes: Optional[int] = None) -> Dict[str, float]:
    """
    E(f, g) = (c/2) int int (f(y) - f(x)) (g(y) - g(x)) |x - y|^{-d-alpha} dx dy.

    With B the joint support box, pairs with one point outside B reduce to
    (c/2) int_B f g kappa, kappa(y) = int_{R^d \\ B} |x - y|^{-d-alpha} dx
    = (1/alpha) int_S ell(theta)^{-alpha} d theta, ell the exit length.

    Returns:
        Dict with value, error and converged
    """
    require_admissible(params, f, "Q")
    require_admissible(params, g, "Q")
    settings = resolve_settings(settings)
    f_lo, f_hi = support_box(f, "Q")
    g_lo, g_hi = support_box(g, "Q")
    lo, hi = np.minimum(f_lo, g_lo), np.maximum(f_hi, g_hi)
    points, weights = _outer_rule(params, lo, hi, panels, nodes)
    rule = rule_for(params, settings)

    densities = ordered_map(lambda x: _form_density(params, f, g, x, lo, hi, rule, settings),
                            list(points), settings.threads)
    inner = np.array([v for v, _, _ in densities])
    error = float(np.abs(weights) @ np.array([e for _, e, _ in densities]))
    converged = all(ok for _, _, ok in densities)

    kappa = np.array([
        float(_exit_lengths(y, rule.directions, lo, hi) ** (-params.alpha) @ rule.weights) / params.alpha
        for y in points
    ])
    boundary = 0.5 * params.c_dalpha * float((np.asarray(f(points)) * np.asarray(g(points)) * kappa) @ weights)
    value = float(inner @ weights) + boundary
    if not converged:
        logger.warning(f"Form E({f.name}, {g.name}): inner radial integrals reported warnings")
    return {"value": value, "error": error, "converged": converged}


def op_form_fourier(params: Params, f: TestFunction, g: TestFunction) -> Dict[str, float]:
    """
    E(f, g) = (2 pi)^{-d} int |xi|^alpha F f conj(F g) d xi for radial f, g.

    Raises:
        AdmissibilityError: If either function lacks a radial Fourier profile
    """
    for h in (f, g):
        if not _has_profile(h):
            raise AdmissibilityError(f"Fourier-side form refuses {h.name}: no radial Fourier profile",
                                     method="Q", function=h.name)
    if f.d != params.d or g.d != params.d:
        raise DomainError("Form arguments must live in dimension d")
    alpha = params.alpha
    pf, pg = f.fourier_profile, g.fourier_profile
    offset = float(np.linalg.norm(f.center - g.center))
    value, error = radial_fourier_inverse(lambda s: s ** alpha * pf(s) * pg(s), offset, params.d)
    return {"value": value, "error": error, "converged": math.isfinite(value)}


def check_form_adjoint(params: Params, f: TestFunction, g: TestFunction, settings: Optional[EvalSettings] = None,
                       panels: Optional[int] = None, nodes: Optional[int] = None,
                       tolerance: float = PAIRING_TOL) -> Dict[str, object]:
    """
    |int (L f) g + E(f, g)| with L f from the symmetrized integral.

    Returns:
        Row with pairing, form, residual and passed
    """
    settings = resolve_settings(settings)
    pairing = _paired(params, f, g, settings, False, panels, nodes, "Q")
    form = op_form(params, f, g, settings, panels, nodes)
    residual = abs(pairing["value"] + form["value"])
    passed = residual <= tolerance
    if not passed:
        logger.warning(f"Form adjointness {f.name}/{g.name}: residual {residual:.2e}")
    return {"name": "form_adjoint", "function": f.name, "partner": g.name, "pairing": pairing["value"],
            "form": form["value"], "residual": residual, "passed": bool(passed)}
