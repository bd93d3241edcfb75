"""
Test functions with analytic metadata: decay class, gradient, radial Fourier
profile and exact oracles for L f.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import special

from ..kernels.params import Params
from ..kernels.radial import radial_fourier_inverse
from ..specfun.bessel import bessel_k
from ..specfun.gamma import gamma, log_gamma
from ..utils.errors import DomainError

KERNEL_METHODS = ("I", "I-compensated", "I-symmetrized", "D", "S", "H")
DECAY_KINDS = ("schwartz", "power", "compact", "growth")


@dataclass(frozen=True)
class DecayClass:
    """
    Growth or decay contract of a test function.

    kind:
        schwartz  rapid decay
        power     |f(x)| <= C (1 + |x|)^{-exponent}
        compact   support in the ball of radius exponent about the centre
        growth    |f(x)| <= C (1 + |x|)^{exponent}
    """

    kind: str
    exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in DECAY_KINDS:
            raise DomainError(f"Unknown decay class: {self.kind}")

    def admits(self, method: str, params: Params) -> Tuple[bool, str]:
        """
        Decide whether a definition's integrals exist for this class.

        Returns:
            (admitted, reason when refused)
        """
        if method in KERNEL_METHODS and self.kind == "growth" and self.exponent >= params.alpha:
            return False, (f"growth of order {self.exponent:g} is not integrable against "
                           f"(1+|z|)^(-d-alpha) for alpha={params.alpha:g}")
        if method == "F-grid" and self.kind not in ("schwartz", "compact"):
            return False, "grid transform needs negligible mass outside the box"
        if method == "R":
            if params.alpha >= params.d:
                return False, f"Riesz potential needs alpha < d (d={params.d}, alpha={params.alpha:g})"
            if self.kind == "growth":
                return False, "Riesz inversion needs a decaying function"
        return True, ""

    def describe(self) -> str:
        if self.kind == "schwartz":
            return "schwartz"
        return f"{self.kind}({self.exponent:g})"


@dataclass(eq=False)
class TestFunction:
    """A test function with everything the evaluators and oracles need."""

    __test__ = False

    name: str
    d: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    decay: DecayClass
    center: np.ndarray = None
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fourier_profile: Optional[Callable[[float], float]] = None
    radial: bool = False
    oracle: Optional[Callable[[np.ndarray], float]] = None
    oracle_note: str = ""
    oracle_methods: Tuple[str, ...] = ()
    kinks: Optional[Callable[[np.ndarray], List[float]]] = None
    support_radius: float = math.inf
    description: str = ""
    expected: Dict[str, str] = field(default_factory=dict)
    evaluation_point: Optional[np.ndarray] = None

    def __post_init__(self):
        self.center = np.zeros(self.d) if self.center is None else np.asarray(self.center, dtype=float)

    def __call__(self, x) -> np.ndarray:
        return self.evaluator(np.asarray(x, dtype=float))

    def value(self, x) -> float:
        return float(self.evaluator(np.asarray(x, dtype=float).reshape(self.d)))

    def breakpoints(self, x) -> List[float]:
        """Radii from x where f restricted to rays is not smooth."""
        return [] if self.kinks is None else [r for r in self.kinks(np.asarray(x, dtype=float)) if r > 0]

    def grad(self, x, step: float = 1e-6) -> Tuple[np.ndarray, str]:
        """
        Gradient at x: analytic when supplied, else central differences.

        Returns:
            (gradient, source) with source 'analytic' or 'central-difference'
        """
        x = np.asarray(x, dtype=float).reshape(self.d)
        if self.gradient is not None:
            return np.asarray(self.gradient(x), dtype=float), "analytic"
        eye = np.eye(self.d) * step
        values = [(self.value(x + e) - self.value(x - e)) / (2.0 * step) for e in eye]
        return np.array(values), "central-difference"

    def has_oracle(self, method: Optional[str] = None) -> bool:
        if self.oracle is None:
            return False
        return method is None or not self.oracle_methods or method in self.oracle_methods

    def validate(self, seed: int = 0) -> Dict[str, Any]:
        """
        Self-check the metadata: gradient against central differences at 10
        random points (1e-6 relative) and the Fourier profile against the
        evaluator at 5 points (1e-8).

        Returns:
            Dict with per-check results and an overall 'passed'
        """
        rng = np.random.default_rng(seed)
        result: Dict[str, Any] = {"name": self.name, "gradient": None, "fourier": None}
        scale = min(self.support_radius, 2.0) * 0.7 if math.isfinite(self.support_radius) else 1.5

        if self.gradient is not None:
            worst = 0.0
            for _ in range(10):
                x = self.center + rng.uniform(-scale, scale, size=self.d)
                exact = np.asarray(self.gradient(x), dtype=float)
                numeric = np.array([
                    (self.value(x + e) - self.value(x - e)) / 2e-6 for e in np.eye(self.d) * 1e-6
                ])
                denom = max(float(np.max(np.abs(exact))), 1e-3)
                worst = max(worst, float(np.max(np.abs(exact - numeric))) / denom)
            result["gradient"] = worst <= 1e-6

        if self.fourier_profile is not None:
            worst = 0.0
            for _ in range(5):
                x = self.center + rng.uniform(-scale, scale, size=self.d)
                R = float(np.linalg.norm(x - self.center))
                inverted, _ = radial_fourier_inverse(self.fourier_profile, R, self.d)
                worst = max(worst, abs(inverted - self.value(x)))
            result["fourier"] = worst <= 1e-8

        result["passed"] = all(v is not False for v in (result["gradient"], result["fourier"]))
        return result

    def summary(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "decay": self.decay.describe(),
            "gradient": self.gradient is not None,
            "fourier": self.fourier_profile is not None,
            "oracle": self.oracle is not None,
            "description": self.description,
        }


def _rel(x: np.ndarray, center: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=float) - center


def gaussian_lf(params: Params, y) -> float:
    """
    L e^{-|y|^2} = -2^alpha Gamma((d+alpha)/2)/Gamma(d/2) 1F1((d+alpha)/2; d/2; -|y|^2).
    """
    d, alpha = params.d, params.alpha
    y = np.asarray(y, dtype=float)
    r2 = float(np.sum(y * y))
    return -2.0 ** alpha * gamma((d + alpha) / 2.0) / gamma(d / 2.0) * float(
        special.hyp1f1((d + alpha) / 2.0, d / 2.0, -r2)
    )


def make_gaussian(params: Params, name: str = "gaussian", scale: float = 1.0,
                  center: Optional[np.ndarray] = None) -> TestFunction:
    """exp(-scale^2 |x - c|^2) with exact Fourier profile and oracle."""
    d = params.d
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    a2 = scale * scale

    def evaluator(x):
        z = _rel(x, c)
        return np.exp(-a2 * np.sum(z * z, axis=-1))

    def gradient(x):
        z = _rel(x, c)
        return -2.0 * a2 * z * math.exp(-a2 * float(z @ z))

    def fourier(s):
        return (math.pi / a2) ** (d / 2.0) * math.exp(-s * s / (4.0 * a2))

    def oracle(x):
        return scale ** params.alpha * gaussian_lf(params, scale * _rel(x, c))

    return TestFunction(
        name=name, d=d, evaluator=evaluator, decay=DecayClass("schwartz"), center=c,
        gradient=gradient, fourier_profile=fourier, radial=True, oracle=oracle,
        oracle_note="closed-form Fourier integral (confluent hypergeometric)",
        support_radius=6.5 / scale,
        description=f"exp(-{a2:g}|x-c|^2)",
    )


def rational_fourier_profile(d: int, b: float) -> Callable[[float], float]:
    """
    Fourier transform of (1 + |x|^2)^{-b}:
    (2 pi)^{d/2} 2^{1-b} / Gamma(b) s^{b-d/2} K_{b-d/2}(s), with value pi^{d/2} Gamma(b-d/2)/Gamma(b) at 0.
    """
    nu = b - d / 2.0
    if nu <= 0:
        raise DomainError(f"(1+|x|^2)^(-{b}) is not integrable in dimension {d}")
    const = (2.0 * math.pi) ** (d / 2.0) * 2.0 ** (1.0 - b) / math.exp(float(log_gamma(b)))
    at_zero = math.pi ** (d / 2.0) * math.exp(float(log_gamma(nu)) - float(log_gamma(b)))

    def profile(s):
        if s <= 0:
            return at_zero
        if s > 700.0:
            return 0.0
        return const * s ** nu * bessel_k(nu, s)

    return profile


def make_rational(params: Params, name: str, b: float) -> TestFunction:
    """(1 + |x|^2)^{-b}, power class of order 2b."""
    d = params.d
    alpha = params.alpha

    def evaluator(x):
        x = np.asarray(x, dtype=float)
        return (1.0 + np.sum(x * x, axis=-1)) ** (-b)

    def gradient(x):
        return -2.0 * b * x * (1.0 + float(x @ x)) ** (-b - 1.0)

    oracle = None
    note = ""
    if d == 1 and b == 1.0:
        def oracle(x):
            t = float(np.asarray(x).reshape(-1)[0])
            return -math.gamma(1.0 + alpha) * math.cos((1.0 + alpha) * math.atan(t)) / (1.0 + t * t) ** ((1.0 + alpha) / 2.0)
        note = "closed-form cosine transform of |xi|^alpha pi e^{-|xi|}"

    return TestFunction(
        name=name, d=d, evaluator=evaluator, decay=DecayClass("power", 2.0 * b),
        gradient=gradient, fourier_profile=rational_fourier_profile(d, b), radial=True,
        oracle=oracle, oracle_note=note, description=f"(1+|x|^2)^(-{b:g})",
    )


def bump_fourier_profile(d: int, power: int = 3) -> Callable[[float], float]:
    """Fourier transform of (1 - |x|^2)_+^power: pi^{d/2} Gamma(power+1) (2/s)^{d/2+power} J_{d/2+power}(s)."""
    order = d / 2.0 + power
    const = math.pi ** (d / 2.0) * math.gamma(power + 1.0)
    at_zero = const / math.gamma(order + 1.0)

    def profile(s):
        if s < 1e-6:
            return at_zero * (1.0 - s * s / (4.0 * (order + 1.0)))
        return const * (2.0 / s) ** order * float(special.jv(order, s))

    return profile


def make_bump(params: Params, name: str = "bump", center: Optional[np.ndarray] = None) -> TestFunction:
    """C^2 bump (1 - |x - c|^2)^3 supported in the unit ball about c."""
    d = params.d
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)

    def evaluator(x):
        z = _rel(x, c)
        u = 1.0 - np.sum(z * z, axis=-1)
        return np.where(u > 0, u, 0.0) ** 3

    def gradient(x):
        z = _rel(x, c)
        u = 1.0 - float(z @ z)
        return -6.0 * z * u * u if u > 0 else np.zeros(d)

    def kinks(x):
        dist = float(np.linalg.norm(_rel(x, c)))
        return sorted({abs(1.0 - dist), 1.0 + dist})

    return TestFunction(
        name=name, d=d, evaluator=evaluator, decay=DecayClass("compact", 1.0), center=c,
        gradient=gradient, fourier_profile=bump_fourier_profile(d), radial=True, kinks=kinks,
        support_radius=1.0, description="(1-|x-c|^2)_+^3",
    )


def make_constant(params: Params, level: float = 1.0) -> TestFunction:
    """f = level; every definition gives 0."""
    d = params.d
    return TestFunction(
        name="constant", d=d,
        evaluator=lambda x: np.full(np.asarray(x).shape[:-1], level),
        decay=DecayClass("growth", 0.0), gradient=lambda x: np.zeros(d),
        oracle=lambda x: 0.0, oracle_note="constants are annihilated",
        description=f"f = {level:g}",
    )


DECAY_ORDER = ("compact", "schwartz", "power", "growth")


def _weaker(a: DecayClass, b: DecayClass) -> DecayClass:
    rank_a, rank_b = DECAY_ORDER.index(a.kind), DECAY_ORDER.index(b.kind)
    if rank_a != rank_b:
        return a if rank_a > rank_b else b
    if a.kind == "power":
        return a if a.exponent <= b.exponent else b
    return a if a.exponent >= b.exponent else b


def linear_combination(f: TestFunction, g: TestFunction, a: float, b: float) -> TestFunction:
    """a f + b g, keeping every piece of metadata both functions share."""
    if f.d != g.d:
        raise DomainError("Linear combination needs functions of the same dimension")
    same_centre = bool(np.allclose(f.center, g.center))
    decay = _weaker(f.decay, g.decay)
    support = max(f.support_radius, float(np.linalg.norm(g.center - f.center)) + g.support_radius)
    if decay.kind == "compact":
        decay = DecayClass("compact", support)

    gradient = None
    if f.gradient is not None and g.gradient is not None:
        def gradient(x):
            return a * np.asarray(f.gradient(x)) + b * np.asarray(g.gradient(x))

    profile = None
    if same_centre and f.radial and g.radial and f.fourier_profile and g.fourier_profile:
        def profile(s):
            return a * f.fourier_profile(s) + b * g.fourier_profile(s)

    oracle = None
    if f.oracle is not None and g.oracle is not None:
        def oracle(x):
            return a * f.oracle(x) + b * g.oracle(x)

    def kinks(x):
        return f.breakpoints(x) + g.breakpoints(x)

    return TestFunction(
        name=f"{a:g}*{f.name}+{b:g}*{g.name}", d=f.d,
        evaluator=lambda x: a * f(x) + b * g(x), decay=decay, center=f.center,
        gradient=gradient, fourier_profile=profile, radial=profile is not None, oracle=oracle,
        oracle_methods=tuple(set(f.oracle_methods) & set(g.oracle_methods)),
        kinks=kinks if (f.kinks or g.kinks) else None, support_radius=support,
    )


def translated(f: TestFunction, shift) -> TestFunction:
    """x -> f(x - shift)."""
    v = np.asarray(shift, dtype=float).reshape(f.d)
    return TestFunction(
        name=f"{f.name}(x-{v.tolist()})", d=f.d, evaluator=lambda x: f(np.asarray(x) - v),
        decay=f.decay, center=f.center + v,
        gradient=(lambda x: f.gradient(np.asarray(x) - v)) if f.gradient else None,
        fourier_profile=f.fourier_profile, radial=f.radial,
        oracle=(lambda x: f.oracle(np.asarray(x) - v)) if f.oracle else None,
        oracle_methods=f.oracle_methods,
        kinks=(lambda x: f.breakpoints(np.asarray(x) - v)) if f.kinks else None,
        support_radius=f.support_radius,
    )


def dilated(f: TestFunction, factor: float, alpha: float) -> TestFunction:
    """
    x -> f(factor x), with L f_c(x) = factor^alpha (L f)(factor x).

    Args:
        f: Function to dilate
        factor: Positive dilation factor
        alpha: Order used to rescale the oracle
    """
    if factor <= 0:
        raise DomainError("Dilation factor must be positive")
    c = float(factor)
    decay = DecayClass("compact", f.decay.exponent / c) if f.decay.kind == "compact" else f.decay
    profile = None
    if f.fourier_profile is not None:
        def profile(s):
            return c ** (-f.d) * f.fourier_profile(s / c)
    return TestFunction(
        name=f"{f.name}({c:g}x)", d=f.d, evaluator=lambda x: f(c * np.asarray(x)),
        decay=decay, center=f.center / c,
        gradient=(lambda x: c * np.asarray(f.gradient(c * np.asarray(x)))) if f.gradient else None,
        fourier_profile=profile, radial=f.radial,
        oracle=(lambda x: c ** alpha * f.oracle(c * np.asarray(x))) if f.oracle else None,
        oracle_methods=f.oracle_methods,
        kinks=(lambda x: [k / c for k in f.breakpoints(c * np.asarray(x))]) if f.kinks else None,
        support_radius=f.support_radius / c,
    )
