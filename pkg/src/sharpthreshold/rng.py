"""Counter-based, splittable random streams.

Replica ``r`` of master seed ``s`` always draws from the Philox stream keyed
by ``(s, r)``, so results are reproducible no matter how replicas are batched
or scheduled.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, replica: int = 0) -> np.random.Generator:
    """Independent generator for the (seed, replica) pair."""
    key = np.array([seed & _MASK64, replica & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_bits(rng: np.random.Generator, n: int, p: float) -> np.ndarray:
    """n iid Bernoulli(p) bits as uint8."""
    return (rng.random(n) < p).astype(np.uint8)
