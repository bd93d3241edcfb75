"""
Result types shared by the evaluators.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List

from ..utils.errors import DomainError, NonConvergenceError
from ..utils.validators import DEFINITION_TAGS


@dataclass
class ConvergenceTable:
    """Scale ladder, the values on it and the extrapolated limit."""

    scales: List[float]
    values: List[float]
    extrapolated: float = math.nan
    order: float = math.nan
    converged: bool = False
    error_estimate: float = math.inf
    residual: float = math.nan
    model: str = ""

    def __post_init__(self):
        if len(self.scales) != len(self.values):
            raise DomainError("ConvergenceTable needs one value per scale")
        if any(b >= a for a, b in zip(self.scales, self.scales[1:])):
            raise DomainError("ConvergenceTable scales must be strictly decreasing")
        if any(h <= 0 for h in self.scales):
            raise DomainError("ConvergenceTable scales must be positive")

    def rows(self) -> List[Dict[str, float]]:
        """CSV-shaped rows (h, value, extrapolated, order)."""
        return [
            {"h": h, "value": v, "extrapolated": self.extrapolated, "order": self.order}
            for h, v in zip(self.scales, self.values)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scales": list(self.scales),
            "values": list(self.values),
            "extrapolated": self.extrapolated,
            "order": self.order,
            "converged": self.converged,
            "error_estimate": self.error_estimate,
            "residual": self.residual,
            "model": self.model,
        }


@dataclass
class EvalReport:
    """Value of L f(x) under one definition, with an error estimate."""

    value: float
    error_estimate: float
    method: str
    converged: bool = True
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    table: ConvergenceTable = None

    def __post_init__(self):
        if self.method not in DEFINITION_TAGS:
            raise DomainError(f"Unknown definition tag: {self.method}")
        if not self.error_estimate >= 0:
            if math.isnan(self.error_estimate):
                self.error_estimate = math.inf
            else:
                raise DomainError(f"error_estimate must be >= 0, got {self.error_estimate}")

    def raise_for_convergence(self) -> "EvalReport":
        """
        Raise if the evaluation did not converge.

        Raises:
            NonConvergenceError: Carrying this report
        """
        if not self.converged:
            raise NonConvergenceError(
                f"{self.method}: limit did not stabilize (value={self.value:.10g}, "
                f"error={self.error_estimate:.3g})",
                report=self,
            )
        return self

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "method": self.method,
            "value": self.value,
            "error_estimate": self.error_estimate,
            "converged": self.converged,
            "diagnostics": dict(self.diagnostics),
        }
        if self.table is not None:
            out["table"] = self.table.to_dict()
        return out
