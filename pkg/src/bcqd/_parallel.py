from __future__ import annotations

import contextlib

import numba
import numpy as np

from .distributions import substream

# spawn-key tags keep the simulation families on disjoint streams
STREAM_CRITVALS = 0
STREAM_REPLICATIONS = 1
STREAM_ENSEMBLE = 2

# rows of uniforms materialised at once
CHUNK_ELEMENTS = 4_000_000


@contextlib.contextmanager
def threads(count: int | None):
    """Cap numba worker threads for the duration of the block."""
    if count is None:
        yield
        return
    if count < 1:
        raise ValueError(f"thread count must be >= 1, got {count}")
    previous = numba.get_num_threads()
    numba.set_num_threads(min(int(count), numba.config.NUMBA_NUM_THREADS))
    try:
        yield
    finally:
        numba.set_num_threads(previous)


def chunk_bounds(total: int, row_length: int):
    size = max(1, CHUNK_ELEMENTS // max(1, row_length))
    for start in range(0, total, size):
        yield start, min(total, start + size)


def uniform_rows(seed: int, tag: int, start: int, stop: int, n: int) -> np.ndarray:
    """Rows ``start..stop-1`` of uniforms; row s comes from substream (seed, tag, s)."""
    out = np.empty((stop - start, n))
    for row, s in enumerate(range(start, stop)):
        out[row] = substream(seed, tag, s).random(n)
    return out
