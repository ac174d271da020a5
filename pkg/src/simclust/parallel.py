"""Order-preserving worker pool.

Kernels release the GIL, so threads give real parallelism. Results come back
in input order and all randomness is keyed by indices, never by scheduling,
so output does not depend on ``workers``.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def parallel_map(fn, items, workers=1):
    items = list(items)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
