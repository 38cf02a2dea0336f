"""Counter-based random streams.

Monte-Carlo trials are grouped into fixed-size blocks. Block ``b`` of stream
``labels`` under ``seed`` always draws from the same Philox stream, so results
do not depend on how blocks are scheduled across threads.
"""

from __future__ import annotations

import zlib
from typing import Iterator

import numpy as np

BLOCK_SIZE = 512


def _label_key(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    if isinstance(label, float):
        return zlib.crc32(repr(label).encode())
    return zlib.crc32(str(label).encode())


def stream(seed: int, *labels) -> np.random.Generator:
    """Return the generator identified by ``(seed, *labels)``."""
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_label_key(x) for x in labels))
    return np.random.Generator(np.random.Philox(ss))


def blocks(trials: int, block_size: int = BLOCK_SIZE) -> Iterator[tuple[int, int]]:
    """Yield ``(block_index, size)`` pairs covering ``trials`` trials."""
    n_full, rest = divmod(trials, block_size)
    for b in range(n_full):
        yield b, block_size
    if rest:
        yield n_full, rest
