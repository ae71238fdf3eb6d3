"""Replica fan-out with results independent of the worker count."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("LAMINA_THREADS", "1")))
    except ValueError:
        return 1


def map_replicas(fn: Callable[[int], T], seeds: Sequence[int], threads: int | None = None) -> list[T]:
    """fn(seed) for every seed, returned in seed order.

    fn must be a picklable top-level callable when threads > 1.
    """
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(seeds) < 2:
        return [fn(s) for s in seeds]
    chunk = max(1, len(seeds) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, seeds, chunksize=chunk))
