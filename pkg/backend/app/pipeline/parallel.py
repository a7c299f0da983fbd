"""
Thread-pool helpers for data-parallel grid fills and Monte-Carlo trials.
"""
import os
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

DEFAULT_SEED = 0x5EED_E05


def default_workers() -> int:
    """Worker count, capped by EOS_LAB_THREADS when set."""
    env = os.getenv("EOS_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"Ignoring non-integer EOS_LAB_THREADS={env!r}")
    return max(1, min(4, os.cpu_count() or 1))


class ParallelProcessor:
    """Handles parallel processing of independent work items"""

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or default_workers()

    def map_ordered(self, process_func: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """Process items in parallel; results come back in input order."""
        items = list(items)
        if self.max_workers == 1 or len(items) <= 1:
            return [process_func(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            return list(executor.map(process_func, items))


def spawn_generators(seed: int, n: int) -> List[np.random.Generator]:
    """Independent per-trial generators from counter-based SeedSequence splitting."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.default_rng(child) for child in children]
