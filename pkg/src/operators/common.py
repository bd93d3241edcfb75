"""
Helpers shared by the evaluators: admissibility, spherical sums about x and
segment breakpoints.
"""

import math
from typing import Callable, Dict, List, Optional

import numpy as np

from ..kernels.params import Params
from ..kernels.radial import SphereRule, as_point, radial_quad, spherical_sum, sphere_rule
from ..testbank.functions import TestFunction
from ..utils.errors import AdmissibilityError, DomainError
from ..utils.logger import get_logger
from .extrapolation import extrapolate, model_exponents
from .settings import DEFAULT_SETTINGS, EvalSettings
from .types import EvalReport

logger = get_logger(__name__)

DECAYING = ("schwartz", "power", "compact")


def require_admissible(params: Params, f: TestFunction, method: str) -> None:
    """
    Raises:
        AdmissibilityError: If f's decay class is outside the method's contract
        DomainError: If f lives in another dimension
    """
    if f.d != params.d:
        raise DomainError(f"Test function {f.name} has d={f.d}, parameters have d={params.d}")
    admitted, reason = f.decay.admits(method, params)
    if not admitted:
        logger.warning(f"{method} refuses {f.name}: {reason}")
        raise AdmissibilityError(f"{method} refuses {f.name}: {reason}", method=method, function=f.name)


def rule_for(params: Params, settings: EvalSettings) -> SphereRule:
    if params.d == 1:
        return sphere_rule(1)
    return sphere_rule(params.d, settings.n_polar, settings.n_azimuth)


def point(params: Params, x) -> np.ndarray:
    return as_point(x, params.d)


class SphericalProfile:
    """S(rho) = sum_j w_j f(x + rho theta_j) and sigma f(x) for one point."""

    def __init__(self, params: Params, f: TestFunction, x: np.ndarray, rule: SphereRule):
        self.f = f
        self.x = x
        self.rule = rule
        self.fx = f.value(x)
        self.sigma_fx = float(np.sum(rule.weights)) * self.fx
        self.calls = 0

    def __call__(self, rho: float) -> float:
        self.calls += 1
        return float(spherical_sum(self.f, self.x, rho, self.rule))

    def centred(self, rho: float) -> float:
        """S(rho) - sigma f(x)."""
        return self(rho) - self.sigma_fx

    def directional(self, rho: float) -> np.ndarray:
        """f(x + rho theta_j) for every direction."""
        self.calls += 1
        return np.asarray(self.f(self.x + rho * self.rule.directions), dtype=float)


def feature_radii(f: TestFunction, x: np.ndarray) -> List[float]:
    """Radii about x where S(rho) changes character: kinks, the centre, the support edge."""
    radii = list(f.breakpoints(x))
    offset = float(np.linalg.norm(x - f.center))
    if offset > 0:
        radii.append(offset)
    if math.isfinite(f.support_radius):
        radii.append(offset + f.support_radius)
        if f.support_radius > offset:
            radii.append(f.support_radius - offset)
    return sorted({r for r in radii if r > 0})


def exterior_integral(params: Params, f: TestFunction, integrand: Callable[[float], float], a: float,
                      fx: float, settings: EvalSettings, breakpoints: List[float]) -> Dict[str, float]:
    """
    int_a^inf of a radial integrand c rho^{-1-alpha} (S - sigma f(x)) with the far
    field beyond the truncation radius taken analytically for decaying f.
    """
    truncation = settings.truncation
    alpha = params.alpha
    near = radial_quad(integrand, a, truncation, breakpoints, epsabs=1e-13, epsrel=1e-11)
    if f.decay.kind in DECAYING:
        tail = -params.c_dalpha * params.sigma * fx * truncation ** (-alpha) / alpha
        tail_err = 0.0
        ok = near.ok
    else:
        far = radial_quad(integrand, truncation, math.inf, epsabs=1e-13, epsrel=1e-11)
        tail, tail_err, ok = far.value, far.error, near.ok and far.ok
    return {"value": near.value + tail, "error": near.error + tail_err, "ok": ok,
            "evaluations": near.evaluations}


def ladder_report(method: str, params: Params, scales: List[float], values: List[float],
                  settings: EvalSettings, diagnostics: Dict, quad_error: float = 0.0,
                  quad_ok: bool = True) -> EvalReport:
    """Extrapolate a scale table and wrap it as an EvalReport."""
    table = extrapolate(scales, values, order_hint=model_exponents(method, params.alpha),
                        abs_tol=settings.abs_tol, rel_tol=settings.rel_tol)
    diagnostics = dict(diagnostics)
    diagnostics.update({
        "scales_visited": len(scales),
        "extrapolation_order": table.order,
        "extrapolation_model": table.model,
        "fit_residual": table.residual,
    })
    converged = table.converged and quad_ok
    if not converged:
        logger.warning(f"{method}: scale limit did not stabilize (model {table.model})")
    error = table.error_estimate + quad_error
    return EvalReport(table.extrapolated, error if math.isfinite(error) else math.inf, method,
                      converged=converged, diagnostics=diagnostics, table=table)


def resolve_settings(settings: Optional[EvalSettings]) -> EvalSettings:
    return settings or DEFAULT_SETTINGS


def support_box(f: TestFunction, method: str):
    """
    Axis box [c - R, c + R]^d outside which f is negligible.

    Raises:
        AdmissibilityError: If f declares no finite support radius
    """
    if not math.isfinite(f.support_radius):
        raise AdmissibilityError(f"{method} refuses {f.name}: no effective support radius", method=method,
                                 function=f.name)
    return f.center - f.support_radius, f.center + f.support_radius


def box_rule(lo: np.ndarray, hi: np.ndarray, panels: int = 8, nodes: int = 10):
    """Tensor composite Gauss-Legendre rule on a box: (points (N, d), weights (N,))."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    axes, axis_weights = [], []
    for a, b in zip(np.atleast_1d(lo), np.atleast_1d(hi)):
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        axes.append((mid[:, None] + half[:, None] * t[None, :]).ravel())
        axis_weights.append((half[:, None] * w[None, :]).ravel())
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    weights = np.prod(np.stack(np.meshgrid(*axis_weights, indexing="ij"), axis=-1).reshape(-1, len(axes)), axis=1)
    return points, weights
