"""Counter-based random streams.

Every stochastic routine derives its generator from (master seed, purpose
tag, stream index) through Philox, so results are reproducible and
independent of how work is split across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["philox_stream", "PURPOSES"]

PURPOSES = {
    "code": 1,
    "noise": 2,
    "coin": 3,
    "distance": 4,
    "statsum": 5,
    "max-error": 6,
    "posterior": 7,
}


def philox_stream(seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    """Generator keyed by (seed, purpose, index); same triple, same stream."""
    tag = PURPOSES.get(purpose)
    if tag is None:
        raise ValueError(f"unknown stream purpose {purpose!r}")
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(tag)], dtype=np.uint64)
    # the index lives in the top counter word: drawing advances the low
    # words, so distinct indices stay 2^192 draws apart (no overlap)
    counter = np.array([0, 0, 0, np.uint64(index & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
