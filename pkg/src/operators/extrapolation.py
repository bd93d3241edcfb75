"""
Generalized Richardson extrapolation of scale-dependent values.

A table v_k = v(h_k) on a decreasing ladder is fitted by

    v(h) = v_inf + sum_j C_j h^{e_j}

with exponents e_j from the asymptotic expansion of each definition. When the
observed order disagrees with that expansion (non-smooth inputs) the model
v_inf + C_1 h^p + C_2 h^{2p} is fitted with p estimated from the data and
refined by nonlinear least squares.
"""

import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from ..utils.errors import DomainError
from ..utils.logger import get_logger
from .types import ConvergenceTable

logger = get_logger(__name__)

MIN_SCALES = 4
FIT_WINDOW = 6
ORDER_AGREEMENT = 0.3
STAGNANT_ORDER = 0.05
MAX_TERMS = 3


def model_exponents(method: str, alpha: float) -> Tuple[float, ...]:
    """
    Correction exponents of the scale expansion for smooth f.

    I and its variants: r^{2-alpha}, r^{4-alpha}, ...
    D: r^{2-alpha}, r^2, r^{4-alpha}
    S: t, t^2, t^3
    H: y^{2/alpha-1}, y^{2/alpha}, y^{4/alpha-1}, ...
    """
    if method in ("I", "I-compensated", "I-symmetrized"):
        exps = [2.0 - alpha, 4.0 - alpha, 6.0 - alpha]
    elif method == "D":
        exps = [2.0 - alpha, 2.0, 4.0 - alpha, 4.0]
    elif method == "S":
        exps = [1.0, 2.0, 3.0]
    elif method == "H":
        exps = [2.0 / alpha - 1.0, 2.0 / alpha, 4.0 / alpha - 1.0, 4.0 / alpha]
    else:
        raise DomainError(f"No scale expansion for method {method}")
    unique = sorted({round(e, 12) for e in exps if e > 0})
    return tuple(unique[:MAX_TERMS])


def observed_order(scales: np.ndarray, values: np.ndarray) -> float:
    """
    Order p from the last three values, exact for v_inf + C h^p on a geometric ladder.

    Returns:
        p, or nan when the last differences vanish
    """
    d1 = values[-2] - values[-3]
    d2 = values[-1] - values[-2]
    if d1 == 0 or d2 == 0 or not math.isfinite(d1 / d2):
        return math.nan
    ratio = scales[-2] / scales[-1]
    return math.log(abs(d1 / d2)) / math.log(ratio)


def _design(h: np.ndarray, exponents: Sequence[float]) -> np.ndarray:
    return np.column_stack([np.ones_like(h)] + [h ** e for e in exponents])


def _linear_fit(h: np.ndarray, v: np.ndarray, exponents: Sequence[float]) -> Tuple[float, float]:
    # columns scaled by their largest entry for conditioning
    terms = list(exponents)[: max(len(h) - 2, 1)]
    design = _design(h, terms)
    scale = np.max(np.abs(design), axis=0)
    coeffs, *_ = np.linalg.lstsq(design / scale, v, rcond=None)
    fitted = (design / scale) @ coeffs
    return float(coeffs[0] / scale[0]), float(np.max(np.abs(fitted - v)))


def limit_weights(scales: Sequence[float], exponents: Sequence[float]) -> np.ndarray:
    """
    Weights w with sum_k w_k v_k equal to the least-squares v_inf of the
    expansion model on these scales.
    """
    h = np.asarray(scales, dtype=float)
    terms = list(exponents)[: max(len(h) - 2, 1)]
    design = _design(h, terms)
    scale = np.max(np.abs(design), axis=0)
    return np.linalg.pinv(design / scale)[0] / scale[0]


def _data_fit(h: np.ndarray, v: np.ndarray, p0: float) -> Tuple[float, float, float]:
    """Fit v_inf + C1 h^p + C2 h^{2p}; returns (v_inf, p, max residual)."""
    h_scale = h[0]
    x = h / h_scale
    design = _design(x, (p0, 2.0 * p0))
    start, *_ = np.linalg.lstsq(design, v, rcond=None)
    linear_res = float(np.max(np.abs(design @ start - v)))

    def residuals(theta):
        v_inf, c1, c2, p = theta
        return v_inf + c1 * x ** p + c2 * x ** (2.0 * p) - v

    try:
        fit = optimize.least_squares(residuals, np.append(start, p0), xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                     max_nfev=200)
        refined_res = float(np.max(np.abs(fit.fun)))
        if fit.x[3] > 0 and refined_res < linear_res:
            return float(fit.x[0]), float(fit.x[3]), refined_res
    except (ValueError, np.linalg.LinAlgError) as e:
        logger.debug(f"Nonlinear order refinement failed: {e}")
    return float(start[0]), p0, linear_res


def extrapolate(
    scales: Sequence[float],
    values: Sequence[float],
    order_hint: Union[None, float, Sequence[float]] = None,
    abs_tol: float = 1e-8,
    rel_tol: float = 1e-6,
    window: int = FIT_WINDOW,
) -> ConvergenceTable:
    """
    Estimate the h -> 0 limit of a scale table.

    Args:
        scales: Strictly decreasing positive scales h_k (at least 4)
        values: Values v_k
        order_hint: Leading exponent, or the list of correction exponents
        abs_tol, rel_tol: Convergence tolerance max(abs_tol, rel_tol |v_inf|)
        window: Number of finest scales used per fit

    Returns:
        ConvergenceTable; converged iff the extrapolants on the last two
        windows agree within tolerance and the fit residual is at most 10x it

    Raises:
        DomainError: If fewer than 4 scales are given
    """
    h = np.asarray(scales, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(h) < MIN_SCALES:
        raise DomainError(f"extrapolate needs at least {MIN_SCALES} scales, got {len(h)}")
    table = ConvergenceTable(list(h), list(v))

    if not np.all(np.isfinite(v)):
        finite = v[np.isfinite(v)]
        table.extrapolated = float(finite[-1]) if len(finite) else math.nan
        table.model = "non-finite"
        logger.debug("Scale table has non-finite values")
        return table

    tail = v[-3:]
    if float(np.max(tail) - np.min(tail)) <= abs_tol:
        table.extrapolated = float(v[-1])
        table.order = math.inf
        table.converged = True
        table.error_estimate = float(np.max(tail) - np.min(tail))
        table.residual = 0.0
        table.model = "flat"
        return table

    if order_hint is None:
        exponents = None
    elif np.ndim(order_hint) == 0:
        exponents = (float(order_hint),)
    else:
        exponents = tuple(float(e) for e in order_hint)

    p_obs = observed_order(h, v)
    m = min(window, len(h) - 1)

    if exponents is not None and (math.isnan(p_obs) or abs(p_obs - exponents[0]) <= ORDER_AGREEMENT):
        table.model = "expansion"
        table.order = exponents[0]
        current, residual = _linear_fit(h[-m:], v[-m:], exponents)
        previous, _ = _linear_fit(h[-m - 1:-1], v[-m - 1:-1], exponents)
    elif not p_obs > STAGNANT_ORDER:
        table.model = "divergent"
        table.order = p_obs
        table.extrapolated = float(v[-1])
        table.error_estimate = float(np.max(v) - np.min(v))
        logger.debug(f"Scale table does not settle (observed order {p_obs:.3g})")
        return table
    else:
        table.model = "observed-order"
        current, p_fit, residual = _data_fit(h[-m:], v[-m:], p_obs)
        previous, _, _ = _data_fit(h[-m - 1:-1], v[-m - 1:-1], p_obs)
        table.order = p_fit

    tol = max(abs_tol, rel_tol * abs(current))
    step = abs(current - previous)
    table.extrapolated = current
    table.residual = residual
    table.error_estimate = step + residual
    table.converged = bool(math.isfinite(current) and step < tol and residual <= 10.0 * tol)
    logger.debug(
        f"extrapolate[{table.model}]: v={current:.12g} order={table.order:.3g} "
        f"step={step:.2e} residual={residual:.2e} converged={table.converged}"
    )
    return table
