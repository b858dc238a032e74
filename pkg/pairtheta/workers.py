"""Worker pool with deterministic, ordered results.

Numpy releases the GIL in the heavy kernels, so a thread pool is enough to
use several cores; results always come back in item order so reductions do
not depend on the worker count.
"""

import logging
from multiprocessing.pool import ThreadPool
from typing import Callable, Iterable, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """Apply fn to every item, returning results in input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug("fanning %d tasks over %d workers", len(items), workers)
    with ThreadPool(processes=min(workers, len(items))) as pool:
        return pool.map(fn, items, chunksize=1)


def split_range(start: int, stop: int, parts: int) -> list[tuple[int, int]]:
    """Split [start, stop) into at most `parts` contiguous, ordered ranges."""
    total = max(stop - start, 0)
    parts = max(1, min(parts, total)) if total else 1
    bounds = [start + (total * i) // parts for i in range(parts + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(parts)]
