"""Process-pool fan-out for independent model points.

mpmath keeps its precision in global state, so concurrency is by process,
never by thread. Results come back in input order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence


def pmap(fn: Callable, items: Iterable, workers: int = 1) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def compute_tables(models: Sequence, workers: int = 1) -> list:
    from .orthopoly import compute_table

    return pmap(compute_table, models, workers)
