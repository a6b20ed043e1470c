"""
Seeded random streams
Each consumer draws from its own SeedSequence stream, and chunked work is
seeded from (seed, stream, chunk index) so serial and threaded runs agree.
"""
from enum import IntEnum
from typing import Callable, Optional, Sequence, TypeVar

import numpy as np
from joblib import Parallel, delayed

from orthant_mc.config import settings
from orthant_mc.utils.exceptions import DataValidationError
from orthant_mc.utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")

UINT64_MAX = 2**64 - 1


class Stream(IntEnum):
    """Independent random streams derived from one run seed"""

    HEMISPHERE = 0
    RESAMPLE = 1
    SCALE = 2
    GAUSSIAN = 3
    GIBBS = 4
    POLAR = 5
    SIMULATE = 6
    MARGIN = 7
    SCAN = 8


def stream_rng(seed: int, stream: Stream, chunk: Optional[int] = None) -> np.random.Generator:
    """Generator for one stream (and optionally one chunk of it)"""
    if not 0 <= int(seed) <= UINT64_MAX:
        raise DataValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    key = (int(stream),) if chunk is None else (int(stream), int(chunk))
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))


def chunk_sizes(total: int, chunk_size: Optional[int] = None) -> list[int]:
    """Split total rows into fixed-size chunks; the layout ignores thread count"""
    chunk_size = chunk_size or settings.CHUNK_SIZE
    full, rest = divmod(int(total), int(chunk_size))
    return [chunk_size] * full + ([rest] if rest else [])


def map_chunks(func: Callable[..., T], tasks: Sequence[tuple], threads: Optional[int] = None) -> list[T]:
    """Run func(*task) for every task, returning results in task order"""
    threads = max(1, int(threads or settings.THREADS))
    if threads == 1 or len(tasks) <= 1:
        return [func(*task) for task in tasks]
    logger.debug(f"Dispatching {len(tasks)} chunks on {threads} threads")
    return Parallel(n_jobs=threads, prefer="threads")(delayed(func)(*task) for task in tasks)
