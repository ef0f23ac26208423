"""Deterministic per-sample random substreams.

Every Monte Carlo sample draws from its own generator, derived from the
(master seed, sample index) pair through a 64-bit avalanche mixer.  The
resulting streams are reproducible regardless of how samples are scheduled
across workers.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a 64-bit avalanche permutation."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return (x ^ (x >> 31)) & _MASK


def substream_seed(master_seed: int, sample_index: int) -> int:
    """64-bit seed for sample ``sample_index`` of the stream ``master_seed``."""
    return mix64(mix64(master_seed & _MASK) ^ ((sample_index * _GOLDEN) & _MASK))


def substream(master_seed: int, sample_index: int) -> np.random.Generator:
    """Independent generator for one Monte Carlo sample."""
    return np.random.Generator(np.random.PCG64(substream_seed(master_seed, sample_index)))
