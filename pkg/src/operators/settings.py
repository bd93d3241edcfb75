"""
Numerical settings shared by the evaluators.
"""

from dataclasses import dataclass, fields, replace
from typing import Any, Dict, List, Optional

from ..utils.config_loader import ConfigLoader
from ..utils.errors import DomainError


@dataclass(frozen=True)
class EvalSettings:
    """Tolerances, scale ladders and truncation used by every definition."""

    abs_tol: float = 1e-8
    rel_tol: float = 1e-6
    agreement_tol: float = 1e-4
    truncation: float = 1e6
    # I and D: r_k = r0 2^{-k}, k = 0..singular_steps
    r0: float = 1.0
    singular_steps: int = 12
    # S: t_k = t0 4^{-k}
    t0: float = 1.0
    semigroup_steps: int = 10
    # H: y_k = y0 4^{-k}
    y0: float = 1.0
    harmonic_steps: int = 10
    # cut-off radius of the small-rho correction (compensated / symmetrized)
    inner_radius: float = 1e-3
    gradient_step: float = 1e-6
    n_polar: Optional[int] = None
    n_azimuth: Optional[int] = None
    threads: int = 1

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("Tolerances must be positive")
        for name in ("singular_steps", "semigroup_steps", "harmonic_steps"):
            if getattr(self, name) < 3:
                raise DomainError(f"{name} must be at least 3 (extrapolation needs 4 scales)")
        if not (self.r0 > 0 and self.t0 > 0 and self.y0 > 0):
            raise DomainError("Ladder starts must be positive")

    def singular_ladder(self) -> List[float]:
        return [self.r0 * 2.0 ** (-k) for k in range(self.singular_steps + 1)]

    def semigroup_ladder(self) -> List[float]:
        return [self.t0 * 4.0 ** (-k) for k in range(self.semigroup_steps + 1)]

    def harmonic_ladder(self) -> List[float]:
        return [self.y0 * 4.0 ** (-k) for k in range(self.harmonic_steps + 1)]

    def with_overrides(self, **overrides: Any) -> "EvalSettings":
        """Copy with the non-None overrides applied."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise DomainError(f"Unknown settings: {', '.join(sorted(unknown))}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @classmethod
    def from_config(cls, config: ConfigLoader) -> "EvalSettings":
        """
        Build settings from the YAML configuration (numerics, ladders, parallel).

        Args:
            config: Loaded ConfigLoader

        Returns:
            EvalSettings with defaults for missing keys
        """
        d = cls()
        return cls(
            abs_tol=config.get_float("numerics.abs_tol", d.abs_tol),
            rel_tol=config.get_float("numerics.rel_tol", d.rel_tol),
            agreement_tol=config.get_float("numerics.agreement_tol", d.agreement_tol),
            truncation=config.get_float("numerics.truncation", d.truncation),
            inner_radius=config.get_float("numerics.inner_radius", d.inner_radius),
            gradient_step=config.get_float("numerics.gradient_step", d.gradient_step),
            n_polar=config.get("numerics.angular.n_polar", d.n_polar),
            n_azimuth=config.get("numerics.angular.n_azimuth", d.n_azimuth),
            r0=config.get_float("ladders.singular.r0", d.r0),
            singular_steps=int(config.get_float("ladders.singular.steps", d.singular_steps)),
            t0=config.get_float("ladders.semigroup.t0", d.t0),
            semigroup_steps=int(config.get_float("ladders.semigroup.steps", d.semigroup_steps)),
            y0=config.get_float("ladders.harmonic.y0", d.y0),
            harmonic_steps=int(config.get_float("ladders.harmonic.steps", d.harmonic_steps)),
            threads=int(config.get("parallel.threads", d.threads) or 1),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_SETTINGS = EvalSettings()
