"""
Deterministic thread-pool helpers.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV_VAR = "FRACLAP_THREADS"


def default_threads(configured: Optional[int] = None) -> int:
    """
    Resolve the worker count.

    Precedence: explicit value, then FRACLAP_THREADS, then 1.

    Args:
        configured: Explicit thread count (None to fall through)

    Returns:
        Positive thread count
    """
    if configured is not None:
        return max(1, int(configured))
    env_value = os.environ.get(THREADS_ENV_VAR)
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError:
            pass
    return 1


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """
    Map func over items, returning results in submission order.

    Exceptions propagate from the first failing item in order.

    Args:
        func: Function to apply
        items: Inputs
        threads: Worker count (1 runs inline)

    Returns:
        List of results in input order
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = [executor.submit(func, item) for item in items]
        return [future.result() for future in futures]
