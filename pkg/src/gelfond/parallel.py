"""Thread fan-out with order-preserving merge.

Work is always split into fixed-size chunks that do not depend on the
thread count, so results are identical for any number of workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "GELFOND_THREADS"


def resolve_threads(requested=None) -> int:
    env = os.environ.get(ENV_VAR)
    value = env if env else requested
    if value in (None, "", "auto"):
        return os.cpu_count() or 1
    n = int(value)
    if n < 1:
        raise ValueError("thread count must be positive")
    return n


def ordered_map(fn, items, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunk_ranges(start: int, stop: int, size: int):
    return [(a, min(stop, a + size)) for a in range(start, stop, size)]
