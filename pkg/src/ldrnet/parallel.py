"""Order-preserving worker pool for per-image work.

The ``LDRNET_THREADS`` environment variable caps the pool size.  Work items
must be pure functions of their inputs, so results are identical to a
sequential map regardless of scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "LDRNET_THREADS"


def thread_count() -> int:
    cpus = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV)
    if raw is not None:
        try:
            return max(1, min(int(raw), cpus))
        except ValueError:
            pass
    return min(4, cpus)


def parallel_map(fn, items) -> list:
    """Map ``fn`` over ``items``, preserving input order."""
    items = list(items)
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
