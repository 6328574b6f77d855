"""Deterministic substreams and optional thread fan-out.

Every estimator splits its work into chunks and seeds each chunk from
``(seed, stream, chunk_index)``, so results never depend on how many workers
run the chunks.
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

WORKERS_ENV = "HILBERTGEOM_WORKERS"
CHUNK_SIZE = 4096

# stream tags keep unrelated consumers of one seed independent
STREAM_UNIFORM = 1
STREAM_DIRECTIONS = 2
STREAM_POLAR = 3
STREAM_MEASURE = 4
STREAM_SUITE = 5


def substream(seed, stream, index=0):
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, stream, index])


def worker_count():
    try:
        n = int(os.environ.get(WORKERS_ENV, "1"))
    except ValueError:
        n = 1
    return max(1, n)


def map_chunks(fn, items):
    """``[fn(item) for item in items]``, threaded when workers > 1."""
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
