"""
Input validation utilities for fraclap.
"""

import math
import re
from typing import Iterable, Sequence

VALID_DIMENSIONS = (1, 2, 3)

DEFINITION_TAGS = (
    "F", "W", "B", "BB", "I", "I-compensated", "I-symmetrized",
    "D", "Q", "S", "R", "H",
)

# Tags accepted by the pointwise evaluators (W and Q are pairings, not pointwise)
POINTWISE_TAGS = (
    "F", "B", "BB", "I", "I-compensated", "I-symmetrized", "D", "S", "H", "R",
)

TAG_ALIASES = {
    "Ibar": "I-compensated",
    "I-bar": "I-compensated",
    "Itilde": "I-symmetrized",
    "I-tilde": "I-symmetrized",
}

OUTPUT_FORMATS = ("json", "csv", "human")


def validate_dimension(d: int) -> bool:
    """
    Validate spatial dimension.

    Args:
        d: Dimension

    Returns:
        True if d is 1, 2 or 3
    """
    return isinstance(d, int) and not isinstance(d, bool) and d in VALID_DIMENSIONS


def validate_alpha(alpha: float) -> bool:
    """
    Validate the stability index.

    Args:
        alpha: Stability index

    Returns:
        True if alpha lies in the open interval (0, 2)
    """
    try:
        value = float(alpha)
    except (TypeError, ValueError):
        return False
    return math.isfinite(value) and 0.0 < value < 2.0


def validate_point(x: Sequence[float], d: int) -> bool:
    """
    Validate that x is a finite point of R^d.

    Args:
        x: Coordinates
        d: Expected dimension

    Returns:
        True if valid, False otherwise
    """
    try:
        coords = [float(c) for c in x]
    except (TypeError, ValueError):
        return False
    return len(coords) == d and all(math.isfinite(c) for c in coords)


def normalize_tag(tag: str) -> str:
    """
    Map tag aliases to canonical definition tags.

    Args:
        tag: User-supplied tag

    Returns:
        Canonical tag (unchanged if not an alias)
    """
    return TAG_ALIASES.get(tag, tag)


def validate_definition_tags(tags: Iterable[str]) -> bool:
    """
    Validate definition tags for pointwise evaluation.

    Args:
        tags: Tags to check

    Returns:
        True if every tag is a known pointwise tag
    """
    return all(normalize_tag(t) in POINTWISE_TAGS for t in tags)


def validate_output_format(fmt: str) -> bool:
    """Check output format name."""
    return fmt in OUTPUT_FORMATS


def validate_thread_count(threads: int) -> bool:
    """Check thread count is a positive integer."""
    return isinstance(threads, int) and threads >= 1


def parse_point(text: str) -> list:
    """
    Parse a point given as comma-separated coordinates.

    Args:
        text: e.g. "0.3,0.3" or "0"

    Returns:
        List of floats

    Raises:
        ValueError: If a coordinate is not a number
    """
    parts = [p for p in re.split(r'[,\s]+', text.strip()) if p]
    if not parts:
        raise ValueError(f"Empty point: '{text}'")
    return [float(p) for p in parts]


def validate_run_id(run_id: str) -> bool:
    """
    Validate report run ID format.

    Args:
        run_id: Run ID to validate

    Returns:
        True if valid, False otherwise
    """
    # Run ID is timestamp-based: YYYYMMDD_HHMMSS_randomstr
    pattern = r'^\d{8}_\d{6}_[a-zA-Z0-9]+$'
    return bool(re.match(pattern, run_id))
