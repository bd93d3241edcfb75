"""
Registry of test functions: the standard smooth bank, the special entries
(harmonic polynomial, |x_1|^{alpha-1}) and the pathological shell series.
"""

import math
from typing import Dict, List, Optional

import numpy as np

from ..kernels.params import Params
from ..utils.errors import DomainError
from ..utils.logger import get_logger
from .functions import (
    DecayClass,
    TestFunction,
    make_bump,
    make_constant,
    make_gaussian,
    make_rational,
)

logger = get_logger(__name__)

PATHOLOGICAL_TERMS = 20

EXCLUDED_ENTRIES = {
    "signed_abs_power": "|x_1|^(alpha-2) sign x_1 is not locally bounded; no principal-value contract evaluates it",
}


def bank_standard(params: Params) -> List[TestFunction]:
    """
    Smooth entries: Gaussians (centred, shifted, scaled), Cauchy-type and
    squared rational functions, the C^2 bump and the constant.

    Args:
        params: Problem parameters

    Returns:
        List of TestFunction
    """
    d = params.d
    return [
        make_gaussian(params),
        make_gaussian(params, name="gaussian_shifted", center=np.full(d, 0.3)),
        make_gaussian(params, name="gaussian_scaled", scale=1.5),
        make_rational(params, "cauchy", (d + 1) / 2.0),
        make_rational(params, "rational_sq", 2.0),
        make_bump(params),
        make_constant(params),
    ]


def harmonic_polynomial(params: Params) -> TestFunction:
    """x_1^2 - x_2^2: heat-invariant, outside every kernel-integral contract."""
    if params.d < 2:
        raise DomainError("harmonic_poly needs d >= 2")
    d = params.d

    def evaluator(x):
        x = np.asarray(x, dtype=float)
        return x[..., 0] ** 2 - x[..., 1] ** 2

    def gradient(x):
        g = np.zeros(d)
        g[0], g[1] = 2.0 * x[0], -2.0 * x[1]
        return g

    return TestFunction(
        name="harmonic_poly", d=d, evaluator=evaluator, decay=DecayClass("growth", 2.0),
        gradient=gradient, oracle=lambda x: 0.0, oracle_methods=("B", "BB"),
        oracle_note="f * k_t = f for every t",
        description="x_1^2 - x_2^2",
        expected={"B": "0", "S": "refused", "I": "refused"},
    )


def abs_power(params: Params) -> TestFunction:
    """|x_1|^{alpha-1}, alpha in (1, 2): annihilated by the Dynkin operator off x_1 = 0."""
    alpha = params.alpha
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"abs_power needs alpha in (1, 2), got {alpha}")
    d = params.d
    k = alpha - 1.0

    def evaluator(x):
        x = np.asarray(x, dtype=float)
        return np.abs(x[..., 0]) ** k

    def gradient(x):
        g = np.zeros(d)
        if x[0] != 0:
            g[0] = k * abs(x[0]) ** (k - 1.0) * math.copysign(1.0, x[0])
        return g

    def kinks(x):
        return [abs(float(x[0]))] if d == 1 else []

    def oracle(x):
        if float(np.asarray(x).reshape(-1)[0]) == 0:
            raise DomainError("abs_power oracle holds only off the hyperplane x_1 = 0")
        return 0.0

    return TestFunction(
        name="abs_power", d=d, evaluator=evaluator, decay=DecayClass("growth", k),
        gradient=gradient, oracle=oracle, kinks=kinks,
        oracle_methods=("I", "I-compensated", "I-symmetrized", "D"),
        oracle_note="alpha-harmonic off the hyperplane x_1 = 0",
        description=f"|x_1|^{k:g}", evaluation_point=np.eye(d)[0] * 0.5,
        expected={"D": "0 for x_1 != 0"},
    )


def bank_special(params: Params) -> List[TestFunction]:
    """Entries that separate the definitions by their domains."""
    entries = []
    if params.d >= 2:
        entries.append(harmonic_polynomial(params))
    if 1.0 < params.alpha < 2.0:
        entries.append(abs_power(params))
    return entries


def _radius(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.sum(x * x, axis=-1))


def path_i_not_d(params: Params, terms: int = PATHOLOGICAL_TERMS) -> TestFunction:
    """
    Sum eps_n (|z|^2 - r_n^2)^{alpha/2-1} on r_n <= |z| <= 2 r_n with eps_n = 5^{-n},
    r_n = 2^{-n}: the principal value exists at 0, the Dynkin limit does not.
    """
    alpha = params.alpha
    n = np.arange(1, terms + 1)
    radii = 2.0 ** (-n.astype(float))
    weights = 5.0 ** (-n.astype(float))

    def evaluator(x):
        rho = _radius(x)
        out = np.zeros_like(rho)
        for r_n, eps in zip(radii, weights):
            shell = (rho > r_n) & (rho <= 2.0 * r_n)
            safe = np.where(shell, rho, 2.0 * r_n)
            out = out + np.where(shell, eps * (safe * safe - r_n * r_n) ** (alpha / 2.0 - 1.0), 0.0)
        return out

    def kinks(x):
        offset = float(np.linalg.norm(x))
        if offset == 0.0:
            return sorted({float(r) for r in radii} | {float(2.0 * r) for r in radii})
        return []

    return TestFunction(
        name="path_I_not_D", d=params.d, evaluator=evaluator, decay=DecayClass("compact", 1.0),
        kinks=kinks, support_radius=1.0, evaluation_point=np.zeros(params.d),
        description=f"shell series eps_n=5^-n, r_n=2^-n ({terms} terms)",
        expected={"I": "converged", "D": "not converged"},
    )


def path_s_not_i(params: Params, terms: int = PATHOLOGICAL_TERMS) -> TestFunction:
    """
    Sum eps_n |z|^{1+alpha} (1[r_n, (1+delta_n) r_n] - 1[(1-delta_n) r_n, r_n]) with
    eps_n = n 8^n, delta_n = 4^{-n}, r_n = 2^{-n}: the semigroup limit at 0 is 0
    while the principal-value partial values grow like c sigma n.
    """
    alpha = params.alpha
    n = np.arange(1, terms + 1).astype(float)
    radii = 2.0 ** (-n)
    deltas = 4.0 ** (-n)
    weights = n * 8.0 ** n

    def evaluator(x):
        rho = _radius(x)
        out = np.zeros_like(rho)
        for r_n, delta, eps in zip(radii, deltas, weights):
            outer = (rho >= r_n) & (rho <= (1.0 + delta) * r_n)
            inner = (rho >= (1.0 - delta) * r_n) & (rho < r_n)
            sign = np.where(outer, 1.0, 0.0) - np.where(inner, 1.0, 0.0)
            out = out + eps * sign * rho ** (1.0 + alpha)
        return out

    def kinks(x):
        if float(np.linalg.norm(x)) == 0.0:
            edges = set()
            for r_n, delta in zip(radii, deltas):
                edges.update({float((1.0 - delta) * r_n), float(r_n), float((1.0 + delta) * r_n)})
            return sorted(edges)
        return []

    return TestFunction(
        name="path_S_not_I", d=params.d, evaluator=evaluator, decay=DecayClass("compact", 1.0),
        kinks=kinks, support_radius=1.0, evaluation_point=np.zeros(params.d),
        description=f"double shells eps_n=n 8^n, delta_n=4^-n, r_n=2^-n ({terms} terms)",
        expected={"S": "converged to 0", "I": "partial values grow like c sigma n"},
    )


def bank_pathological(params: Params) -> List[TestFunction]:
    """The two shell-series counterexamples, centred at the origin."""
    return [path_i_not_d(params), path_s_not_i(params)]


def full_bank(params: Params) -> Dict[str, TestFunction]:
    """Every entry available for (d, alpha), keyed by name."""
    entries = bank_standard(params) + bank_special(params) + bank_pathological(params)
    return {f.name: f for f in entries}


def get_function(params: Params, name: str) -> TestFunction:
    """
    Look up a bank entry by name.

    Raises:
        DomainError: If the name is unknown or unavailable for these parameters
    """
    if name in EXCLUDED_ENTRIES:
        raise DomainError(f"'{name}' is excluded from the bank: {EXCLUDED_ENTRIES[name]}")
    bank = full_bank(params)
    if name not in bank:
        raise DomainError(
            f"Unknown test function '{name}' for d={params.d}, alpha={params.alpha:g}; "
            f"available: {', '.join(sorted(bank))}"
        )
    return bank[name]


def list_bank(params: Params, validate: bool = False) -> List[Dict]:
    """
    Rows describing each entry: name, decay class, oracle availability and,
    when requested, the metadata self-validation result.
    """
    rows = []
    for group, entries in (("standard", bank_standard(params)), ("special", bank_special(params)),
                           ("pathological", bank_pathological(params))):
        for f in entries:
            row = f.summary()
            row["group"] = group
            if validate:
                check = f.validate()
                row["validated"] = check["passed"]
                if not check["passed"]:
                    logger.warning(f"Bank entry {f.name} failed self-validation: {check}")
            rows.append(row)
    for name, reason in EXCLUDED_ENTRIES.items():
        rows.append({"name": name, "group": "excluded", "decay": "-", "gradient": False,
                     "fourier": False, "oracle": False, "description": reason})
    return rows
