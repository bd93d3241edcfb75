"""
Definition dispatch and the pairwise agreement matrix.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

from ..kernels.params import Params
from ..testbank.functions import TestFunction
from ..utils.errors import AdmissibilityError, DomainError, UnsupportedError
from ..utils.logger import get_logger
from ..utils.parallel import ordered_map
from ..utils.validators import POINTWISE_TAGS, normalize_tag
from .bochner import op_balakrishnan, op_bochner
from .common import point, resolve_settings
from .fourier import op_fourier
from .riesz import op_riesz
from .semigroup import op_harmonic, op_semigroup
from .settings import EvalSettings
from .singular import op_dynkin, op_singular, op_singular_compensated, op_singular_symmetrized
from .types import EvalReport

logger = get_logger(__name__)

# ceiling on e_i + e_j + agreement_tol
AGREEMENT_CAP = 1e-3

EVALUATORS: Dict[str, Callable[..., EvalReport]] = {
    "F": op_fourier,
    "B": op_bochner,
    "BB": op_balakrishnan,
    "I": op_singular,
    "I-compensated": op_singular_compensated,
    "I-symmetrized": op_singular_symmetrized,
    "D": op_dynkin,
    "S": op_semigroup,
    "H": op_harmonic,
    "R": op_riesz,
}


def evaluate_definition(params: Params, f: TestFunction, x, tag: str,
                        settings: Optional[EvalSettings] = None) -> EvalReport:
    """
    Evaluate L f(x) with the definition named by tag.

    Raises:
        DomainError: For tags without a pointwise evaluator
    """
    canonical = normalize_tag(tag)
    if canonical not in POINTWISE_TAGS:
        raise DomainError(f"No pointwise evaluator for '{tag}'. Available: {', '.join(POINTWISE_TAGS)}")
    logger.debug(f"Evaluating {canonical} for {f.name} at {list(x) if hasattr(x, '__iter__') else x}")
    return EVALUATORS[canonical](params, f, x, settings)


@dataclass
class MatrixEntry:
    """One definition's outcome: a report or the reason it was skipped."""

    tag: str
    report: Optional[EvalReport] = None
    skipped: bool = False
    reason: str = ""
    oracle_deviation: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"tag": self.tag, "skipped": self.skipped, "reason": self.reason}
        if self.report is not None:
            data.update({"value": self.report.value, "error_estimate": self.report.error_estimate,
                         "converged": self.report.converged})
        if self.oracle_deviation is not None:
            data["oracle_deviation"] = self.oracle_deviation
        return data


@dataclass
class AgreementMatrix:
    """Pairwise comparison of every evaluated definition."""

    function: str
    point: List[float]
    entries: Dict[str, MatrixEntry]
    pairs: List[Dict[str, Any]] = field(default_factory=list)
    oracle: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(p["passed"] for p in self.pairs) and all(
            e.report.converged for e in self.entries.values() if e.report is not None
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "function": self.function,
            "point": self.point,
            "oracle": self.oracle,
            "entries": [e.to_dict() for e in self.entries.values()],
            "pairs": list(self.pairs),
            "passed": self.passed,
        }


def _evaluate_entry(params: Params, f: TestFunction, x, tag: str, settings: EvalSettings) -> MatrixEntry:
    try:
        report = evaluate_definition(params, f, x, tag, settings)
    except (AdmissibilityError, UnsupportedError) as e:
        return MatrixEntry(tag=tag, skipped=True, reason=str(e))
    entry = MatrixEntry(tag=tag, report=report)
    if f.has_oracle(tag):
        try:
            entry.oracle_deviation = abs(report.value - f.oracle(point(params, x)))
        except DomainError:
            pass
    return entry


def agreement_matrix(params: Params, f: TestFunction, x, definitions: Optional[Sequence[str]] = None,
                     settings: Optional[EvalSettings] = None) -> AgreementMatrix:
    """
    Evaluate each definition at x and compare every pair.

    Structural exclusions (refused decay class, R with alpha >= d) are
    skipped, not failed. A pair passes iff both entries converged and
    |v_i - v_j| <= min(e_i + e_j + agreement_tol, 1e-3).

    Args:
        params: Problem parameters
        f: Test function
        x: Evaluation point
        definitions: Tags to include (all pointwise tags by default)
        settings: Tolerances; settings.threads parallelizes over tags

    Returns:
        AgreementMatrix
    """
    settings = resolve_settings(settings)
    tags = [normalize_tag(t) for t in (definitions or POINTWISE_TAGS)]
    unknown = [t for t in tags if t not in POINTWISE_TAGS]
    if unknown:
        raise DomainError(f"Unknown definition tags: {', '.join(unknown)}")
    x = point(params, x)

    results = ordered_map(lambda tag: _evaluate_entry(params, f, x, tag, settings), tags, settings.threads)
    entries = {e.tag: e for e in results}
    oracle = None
    if f.has_oracle():
        try:
            oracle = float(f.oracle(x))
        except DomainError:
            oracle = None

    pairs = []
    evaluated = [e for e in results if e.report is not None]
    for a, b in itertools.combinations(evaluated, 2):
        ra, rb = a.report, b.report
        difference = abs(ra.value - rb.value)
        bound = min(ra.error_estimate + rb.error_estimate + settings.agreement_tol, AGREEMENT_CAP)
        passed = ra.converged and rb.converged and math.isfinite(difference) and difference <= bound
        pairs.append({"a": a.tag, "b": b.tag, "difference": difference, "bound": bound, "passed": bool(passed)})

    matrix = AgreementMatrix(function=f.name, point=x.tolist(), entries=entries, pairs=pairs, oracle=oracle)
    skipped = [e.tag for e in results if e.skipped]
    logger.info(f"Agreement for {f.name} at {x.tolist()}: {len(evaluated)} evaluated, "
                f"{len(skipped)} skipped, {'pass' if matrix.passed else 'FAIL'}")
    return matrix
