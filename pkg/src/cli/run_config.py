"""
Run-config bundles: key=value text files merged under command-line flags.

Example:

    # master oracle
    d = 1
    alpha = 1
    fn = gaussian
    x = 0; 0.5
    def = I, D, S
    out = json

Points are separated by ';', coordinates by ','. Keys not set in a bundle
fall back to config/config.yaml.
"""

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from ..utils.errors import DomainError
from ..utils.validators import (
    OUTPUT_FORMATS,
    normalize_tag,
    parse_point,
    validate_alpha,
    validate_definition_tags,
    validate_dimension,
    validate_output_format,
    validate_point,
    validate_thread_count,
)

KEY_ALIASES = {
    "function": "fn",
    "def": "definitions",
    "defs": "definitions",
    "x": "points",
    "point": "points",
    "n": "n_paths",
    "lambda": "lam",
    "format": "out",
}

SETTINGS_KEYS = ("abs_tol", "rel_tol", "agreement_tol", "r0", "singular_steps", "t0", "semigroup_steps",
                 "y0", "harmonic_steps")
MC_KEYS = ("n_paths", "seed", "mode", "dt", "max_steps")

INT_KEYS = ("d", "singular_steps", "semigroup_steps", "harmonic_steps", "n_paths", "seed", "max_steps", "threads")
FLOAT_KEYS = ("alpha", "abs_tol", "rel_tol", "agreement_tol", "r0", "t0", "y0", "r", "dt", "lam")


def _parse_int(key: str, text: Any) -> int:
    value = float(text)
    if not value.is_integer():
        raise DomainError(f"'{key}' must be an integer, got {text}")
    return int(value)


def _parse_points(value: Any) -> Tuple[Tuple[float, ...], ...]:
    if isinstance(value, str):
        return tuple(tuple(parse_point(part)) for part in value.split(";") if part.strip())
    return tuple(tuple(float(c) for c in p) if hasattr(p, "__iter__") else (float(p),) for p in value)


def _parse_tags(value: Any) -> Tuple[str, ...]:
    items = value.split(",") if isinstance(value, str) else value
    return tuple(normalize_tag(str(t).strip()) for t in items if str(t).strip())


@dataclass(frozen=True)
class RunConfig:
    """
    One experiment's inputs. None means "not set here"; merged bundles
    and the YAML defaults fill the gaps.
    """

    d: Optional[int] = None
    alpha: Optional[float] = None
    fn: Optional[str] = None
    points: Tuple[Tuple[float, ...], ...] = ()
    definitions: Tuple[str, ...] = ()
    abs_tol: Optional[float] = None
    rel_tol: Optional[float] = None
    agreement_tol: Optional[float] = None
    r0: Optional[float] = None
    singular_steps: Optional[int] = None
    t0: Optional[float] = None
    semigroup_steps: Optional[int] = None
    y0: Optional[float] = None
    harmonic_steps: Optional[int] = None
    n_paths: Optional[int] = None
    seed: Optional[int] = None
    mode: Optional[str] = None
    dt: Optional[float] = None
    max_steps: Optional[int] = None
    r: Optional[float] = None
    lam: Optional[float] = None
    out: Optional[str] = None
    threads: Optional[int] = None

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "RunConfig":
        """
        Build a RunConfig from parsed text or an earlier to_mapping().

        Raises:
            DomainError: On unknown keys or unparsable values
        """
        known = {f.name for f in fields(cls)}
        values: Dict[str, Any] = {}
        for raw_key, raw in mapping.items():
            key = KEY_ALIASES.get(raw_key.strip(), raw_key.strip())
            if key not in known:
                raise DomainError(f"Unknown run-config key '{raw_key}'")
            if raw is None or (isinstance(raw, str) and not raw.strip()):
                continue
            try:
                if key == "points":
                    values[key] = _parse_points(raw)
                elif key == "definitions":
                    values[key] = _parse_tags(raw)
                elif key in INT_KEYS:
                    values[key] = _parse_int(key, raw)
                elif key in FLOAT_KEYS:
                    values[key] = float(raw)
                else:
                    values[key] = str(raw).strip()
            except (TypeError, ValueError) as e:
                if isinstance(e, DomainError):
                    raise
                raise DomainError(f"Invalid value for '{raw_key}': {raw!r}") from e
        return cls(**values)

    @classmethod
    def parse_text(cls, text: str) -> "RunConfig":
        """
        Parse key=value lines; '#' starts a comment.

        Raises:
            DomainError: On lines without '=' or duplicate keys
        """
        mapping: Dict[str, str] = {}
        for number, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"Run-config line {number} is not key=value: '{line}'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = KEY_ALIASES.get(key, key)
            if key in mapping:
                raise DomainError(f"Run-config key '{key}' set twice (line {number})")
            mapping[key] = value
        return cls.from_mapping(mapping)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        """
        Load a run-config file.

        Raises:
            FileNotFoundError: If the file doesn't exist
        """
        file_path = Path(path)
        if not file_path.exists():
            raise FileNotFoundError(f"Run-config file not found: {file_path}")
        return cls.parse_text(file_path.read_text(encoding="utf-8"))

    def to_mapping(self) -> Dict[str, Any]:
        """Canonical form: set keys only, canonical names and tags, points as lists."""
        mapping: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or value == ():
                continue
            if f.name == "points":
                value = [list(p) for p in value]
            elif f.name == "definitions":
                value = list(value)
            mapping[f.name] = value
        return mapping

    def to_text(self) -> str:
        """Serialize as a run-config file."""
        lines = []
        for key, value in self.to_mapping().items():
            if key == "points":
                value = "; ".join(",".join(repr(c) for c in p) for p in value)
            elif key == "definitions":
                value = ", ".join(value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def merged(self, override: "RunConfig") -> "RunConfig":
        """Copy with every value set in override taking precedence."""
        updates = {f.name: getattr(override, f.name) for f in fields(override)
                   if getattr(override, f.name) not in (None, ())}
        return replace(self, **updates)

    def settings_overrides(self) -> Dict[str, Any]:
        overrides = {key: getattr(self, key) for key in SETTINGS_KEYS}
        overrides["threads"] = self.threads
        return overrides

    def mc_overrides(self) -> Dict[str, Any]:
        overrides = {key: getattr(self, key) for key in MC_KEYS}
        overrides["threads"] = self.threads
        return overrides

    def point_list(self) -> List[List[float]]:
        """Evaluation points; the origin when none were given."""
        if not self.points:
            return [[0.0] * (self.d or 1)]
        return [list(p) for p in self.points]

    def validate(self, require: Tuple[str, ...] = ("d", "alpha")) -> None:
        """
        Check the values needed by a subcommand.

        Args:
            require: Keys that must be set

        Raises:
            DomainError: With a message naming the valid range
        """
        for key in require:
            if getattr(self, key) in (None, ()):
                raise DomainError(f"Missing required setting '{key}' (flag --{key.replace('_', '-')})")
        if self.d is not None and not validate_dimension(self.d):
            raise DomainError(f"d must be 1, 2 or 3, got {self.d}")
        if self.alpha is not None and not validate_alpha(self.alpha):
            raise DomainError(f"alpha must lie in the open interval (0, 2), got {self.alpha}")
        if self.definitions and not validate_definition_tags(self.definitions):
            raise DomainError(f"Unknown definition tag in {', '.join(self.definitions)}")
        if self.out is not None and not validate_output_format(self.out):
            raise DomainError(f"Output format must be one of {', '.join(OUTPUT_FORMATS)}, got {self.out}")
        if self.threads is not None and not validate_thread_count(self.threads):
            raise DomainError(f"threads must be a positive integer, got {self.threads}")
        if self.d is not None:
            for p in self.points:
                if not validate_point(p, self.d):
                    raise DomainError(f"Point {list(p)} is not a finite point of R^{self.d}")
        if self.r is not None and not (math.isfinite(self.r) and self.r > 0):
            raise DomainError(f"Ball radius r must be positive, got {self.r}")
        if self.lam is not None and not self.lam >= 0:
            raise DomainError(f"lambda must be >= 0, got {self.lam}")
