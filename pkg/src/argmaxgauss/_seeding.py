"""Deterministic seed derivation and block-parallel replication.

Replications are processed in fixed-size blocks. Block ``b`` of stream ``s``
draws from ``SeedSequence(master, spawn_key=(s, b))``, so the output is the
same whatever order (or thread) the blocks run in.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

BLOCK_SIZE = 256

# stream identifiers; one per kind of randomness
STREAM_ESTIMATOR = 1
STREAM_GAUSSIAN = 2
STREAM_BOOTSTRAP = 3
STREAM_MOMENTS = 4
STREAM_TV_SE = 5
STREAM_SUBSETS = 6
STREAM_THEORY = 7


def derive_seed(master: int, *keys: int) -> int:
    """64-bit child seed hashed from ``master`` and integer ``keys``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def stream_rng(master: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys)))


def run_blocks(total: int, fn: Callable[[np.random.Generator, int], np.ndarray],
               master: int, stream: int, workers: int = 1,
               block_size: int = BLOCK_SIZE) -> np.ndarray:
    """Concatenate ``fn(rng_b, count_b)`` over consecutive blocks covering ``total`` items."""
    starts = list(range(0, total, block_size))

    def one(b: int) -> np.ndarray:
        count = min(block_size, total - starts[b])
        return fn(stream_rng(master, stream, b), count)

    if workers <= 1 or len(starts) == 1:
        parts = [one(b) for b in range(len(starts))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(len(starts))))
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
