"""
Numerical probe of complete monotonicity for phi(r) = sqrt(r) K_{alpha/2}(r^{1/alpha}),
1 < alpha < 2. A probe reports sign patterns of derivatives on a grid; it
proves nothing.

Derivatives come from the Cauchy integral on a circle |w - r| = c r,

    phi^{(n)}(r) = n! / (c r)^n * mean_j phi(r + c r e^{i theta_j}) e^{-i n theta_j},

with phi continued by the complex Bessel function. The trapezoid rule is
geometrically convergent and the rounding error grows like n!/c^n only.
"""

import math
from typing import Any, Dict, List, Optional

import numpy as np
from scipy import special

from ..specfun.bessel import bessel_k
from ..utils.errors import DomainError
from ..utils.logger import get_logger

logger = get_logger(__name__)

MAX_ORDER = 8
CIRCLE_NODES = 64
MAX_RELATIVE_RADIUS = 0.5
# rounding noise is scaled by exp(r^{1/alpha} c / alpha); keep that factor below e^5
GROWTH_BUDGET = 5.0
NOISE_FACTOR = 100.0


def conjecture_function(alpha: float, r):
    """phi(r) = sqrt(r) K_{alpha/2}(r^{1/alpha}) for real or complex r off the negative axis."""
    r = np.asarray(r)
    return np.sqrt(r) * special.kv(alpha / 2.0, r ** (1.0 / alpha))


def _circle_radius(alpha: float, r: float) -> float:
    x0 = r ** (1.0 / alpha)
    return min(MAX_RELATIVE_RADIUS, GROWTH_BUDGET * alpha / max(x0, 1e-300))


def derivatives(alpha: float, r: float, orders: int, nodes: int = CIRCLE_NODES) -> Dict[str, Any]:
    """
    phi^{(n)}(r) for n = 0..orders with rounding-noise estimates.

    Returns:
        Dict with values, noise (per order) and the relative circle radius
    """
    c = _circle_radius(alpha, r)
    theta = 2.0 * math.pi * np.arange(nodes) / nodes
    samples = conjecture_function(alpha, r * (1.0 + c * np.exp(1j * theta)))
    scale = float(np.max(np.abs(samples)))
    values, noise = [], []
    for n in range(orders + 1):
        coeff = np.mean(samples * np.exp(-1j * n * theta))
        factor = math.factorial(n) / (c * r) ** n
        values.append(float(coeff.real) * factor)
        noise.append(NOISE_FACTOR * np.finfo(float).eps * scale * factor)
    return {"values": values, "noise": noise, "relative_radius": c}


def probe_conjecture_cm(alpha: float, orders: int = 6, grid: int = 121, r_min: float = 1e-3,
                        r_max: float = 1e3) -> Dict[str, Any]:
    """
    Check (-1)^n phi^{(n)}(r) >= 0 for n = 1..orders on a log grid.

    Points where |phi^{(n)}| is below its noise estimate are counted as
    unresolved, not as violations.

    Args:
        alpha: Stability index in (1, 2)
        orders: Highest derivative order, 1..8
        grid: Number of log-spaced radii
        r_min, r_max: Grid range

    Returns:
        Dict with status ('consistent' or 'violation found'), violations
        (r, order, value), unresolved count and the real-axis deviation
        from the library Bessel function

    Raises:
        DomainError: On alpha outside (1, 2), bad orders or grid
    """
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"The probe needs alpha in the open interval (1, 2), got {alpha}")
    if not 1 <= orders <= MAX_ORDER:
        raise DomainError(f"orders must be between 1 and {MAX_ORDER}, got {orders}")
    if grid < 2 or not 0 < r_min < r_max:
        raise DomainError("Grid needs at least 2 points on 0 < r_min < r_max")

    logger.info(f"Probing complete monotonicity for alpha={alpha:g}: orders 1..{orders}, "
                f"{grid} radii in [{r_min:g}, {r_max:g}]")
    radii = np.geomspace(r_min, r_max, grid)
    violations: List[Dict[str, float]] = []
    unresolved = 0
    worst_deviation = 0.0

    for r in radii:
        result = derivatives(alpha, float(r), orders)
        reference = math.sqrt(r) * float(bessel_k(alpha / 2.0, r ** (1.0 / alpha)))
        if reference > 0:
            worst_deviation = max(worst_deviation, abs(result["values"][0] - reference) / reference)
        for n in range(1, orders + 1):
            value, noise = result["values"][n], result["noise"][n]
            if abs(value) <= noise:
                unresolved += 1
            elif (-1) ** n * value < 0:
                violations.append({"r": float(r), "order": n, "value": value, "noise": noise})

    status = "violation found" if violations else "consistent"
    if violations:
        first = violations[0]
        logger.warning(f"Probe: sign violation at r={first['r']:.4g}, order {first['order']}")
    else:
        logger.info(f"Probe: alternating signs on the whole grid ({unresolved} unresolved entries)")
    return {
        "name": "conjecture_probe",
        "kind": "numerical probe, not a proof",
        "alpha": alpha,
        "orders": orders,
        "grid": grid,
        "r_range": [r_min, r_max],
        "status": status,
        "violations": violations,
        "unresolved": unresolved,
        "bessel_deviation": worst_deviation,
    }


def probe_location(report: Dict[str, Any]) -> Optional[Dict[str, float]]:
    """First violation of a probe report, if any."""
    return report["violations"][0] if report["violations"] else None
