"""Deterministic counter-based random streams.

Every random draw in the package is derived from a 64-bit master seed plus
an explicit integer path, so results never depend on evaluation order,
worker count, or scheduling.  Large sample requests are partitioned into
fixed-size chunks; chunk j always uses the substream (seed, *path, j),
which makes parallel sampling bit-identical to sequential sampling.
"""

from __future__ import annotations

import numpy as np

# Fixed chunk size for partitioned sampling.  Must never change between
# runs of the same artifact version: it is part of the determinism contract.
CHUNK = 1 << 16


def seed_sequence(seed: int, *path: int) -> np.random.SeedSequence:
    """SeedSequence for the substream identified by an integer path."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))


def substream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator for the given (seed, path) substream."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *path)))


def generator_from(ss: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(ss))


def chunk_ranges(count: int):
    """Yield (chunk_index, lo, hi) covering range(count) in CHUNK pieces."""
    j = 0
    lo = 0
    while lo < count:
        hi = min(lo + CHUNK, count)
        yield j, lo, hi
        j += 1
        lo = hi
