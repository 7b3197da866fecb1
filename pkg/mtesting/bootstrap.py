"""
Moving-block bootstrap of T x N return matrices.

Every replicate draws from its own generator seeded with (seed, replicate)
so results do not depend on how replicates are split across workers.
"""

import math
from typing import Iterator, Tuple

import numpy as np

from utils.errors import DomainError


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(replicate)])


def _check_block(n_rows: int, block_length: int) -> None:
    if block_length < 1:
        raise DomainError(f"Block length must be at least 1, got {block_length}")
    if block_length > n_rows:
        raise DomainError(f"Block length {block_length} exceeds the {n_rows} available rows")


def block_bootstrap_indices(n_rows: int, block_length: int, rng: np.random.Generator) -> np.ndarray:
    """Row indices of one replicate: ceil(T/L) blocks with uniform starts in [0, T-L], truncated to T."""
    _check_block(n_rows, block_length)
    n_blocks = math.ceil(n_rows / block_length)
    starts = rng.integers(0, n_rows - block_length + 1, size=n_blocks)
    return (starts[:, None] + np.arange(block_length)[None, :]).ravel()[:n_rows]


def replicate_indices(n_rows: int, block_length: int, seed: int, first: int, count: int) -> np.ndarray:
    """Index matrix (count x T) for replicates first .. first+count-1."""
    return np.stack([block_bootstrap_indices(n_rows, block_length, replicate_rng(seed, b))
                     for b in range(first, first + count)])


def block_bootstrap(series, block_length: int, replicates: int, seed: int = 0) -> np.ndarray:
    """B x T x N array of replicates; rows are resampled jointly across columns."""
    matrix = np.asarray(series, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if replicates < 1:
        raise DomainError(f"Replicate count must be at least 1, got {replicates}")
    _check_block(matrix.shape[0], block_length)
    return matrix[replicate_indices(matrix.shape[0], block_length, seed, 0, replicates)]


def iter_replicate_chunks(series, block_length: int, replicates: int, seed: int = 0,
                          chunk_size: int = 64) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield (first replicate index, chunk x T x N array) without holding all replicates."""
    matrix = np.asarray(series, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    _check_block(matrix.shape[0], block_length)
    for first in range(0, replicates, chunk_size):
        count = min(chunk_size, replicates - first)
        yield first, matrix[replicate_indices(matrix.shape[0], block_length, seed, first, count)]
