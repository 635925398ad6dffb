"""Deterministic RNG derivation shared across modules.

Every randomized stage derives its generator from a master seed plus small
integer stream keys, so results are identical regardless of evaluation
order or parallelism.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def seed_sequence(*keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(k) & _MASK for k in keys])


def derive_rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(*keys))


def derive_seed(*keys: int) -> int:
    """Collapse stream keys to a single 64-bit integer seed."""
    return int(seed_sequence(*keys).generate_state(1, np.uint64)[0])
