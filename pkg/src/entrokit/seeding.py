"""Deterministic seed derivation for replicated Monte Carlo runs.

Per-replicate seeds come from a single fixed 64-bit mixing function
(SplitMix64), so replicate r of a run with base seed s is reproducible in
isolation and independent-looking from its neighbours:

    seed_r = splitmix64_at(base_seed, r)

which is exactly the r-th output of the SplitMix64 stream seeded at
``base_seed``.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    """One SplitMix64 finalization round of a 64-bit word."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(base_seed: int, index: int) -> int:
    """Seed for replicate ``index`` of a run keyed by ``base_seed``."""
    if base_seed < 0:
        raise ValueError("base_seed must be non-negative")
    if index < 0:
        raise ValueError("replicate index must be non-negative")
    return splitmix64((base_seed + (index + 1) * _GOLDEN) & _MASK64)


def generator_for(seed: int) -> np.random.Generator:
    """PCG64 generator keyed directly by ``seed``.

    Replicate r of a run uses generator_for(derive_seed(base_seed, r)), so
    sampling replicate r standalone reproduces its row of a batched run.
    """
    return np.random.Generator(np.random.PCG64(seed))
