"""Deterministic random-stream derivation.

All stochastic operations in the package draw from numpy's PCG64 generator
seeded through a ``SeedSequence``. Sub-streams are derived from the integer
tuple (base_seed, *path), so e.g. a repetition's stream depends only on the
base seed and the repetition index, never on execution order or thread count.
"""

from __future__ import annotations

import numpy as np


def spawn_rng(seed, *path: int) -> np.random.Generator:
    """Return a PCG64 generator for the stream (seed, *path).

    ``seed`` may be an int or an existing ``Generator``; a Generator is
    returned as-is (its state is the stream), in which case ``path`` must be
    empty because a live generator cannot be re-derived.
    """
    if isinstance(seed, np.random.Generator):
        if path:
            raise TypeError("cannot derive a sub-stream from a live Generator")
        return seed
    entropy = (int(seed),) + tuple(int(q) for q in path)
    return np.random.default_rng(np.random.SeedSequence(entropy))
