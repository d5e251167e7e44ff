"""Reproducible parallel random streams.

Work is split into a fixed number of blocks decided by the caller, never by the
worker count. Each block draws from its own Philox (counter-based) generator
spawned from one root seed, and results come back in block order, so any
reduction over them is independent of how many threads ran.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "PQSPIN_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Explicit argument wins, then ``$PQSPIN_THREADS``, then 1."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else 1
    return max(1, int(threads))


def block_streams(seed: int, n_blocks: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(int(seed)).spawn(n_blocks)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def block_sizes(total: int, n_blocks: int) -> list[int]:
    base, extra = divmod(int(total), n_blocks)
    return [base + (1 if i < extra else 0) for i in range(n_blocks)]


def ordered_map(fn, items, threads: int | None = None) -> list:
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
