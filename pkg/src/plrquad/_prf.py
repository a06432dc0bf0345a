"""Counter-based pseudorandom function used by the scramblers.

Streams are keyed by 64-bit values derived from integer tuples through
:class:`numpy.random.SeedSequence`; node bits are SplitMix64 finalizer
outputs of ``key XOR node * GOLDEN``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix_int(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = z + np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_key(*ids: int) -> int:
    """64-bit key from a tuple of non-negative integers."""
    if not ids:
        raise ValueError("need at least one id")
    for i in ids:
        if i < 0:
            raise ValueError(f"ids must be non-negative, got {i}")
    entropy, *spawn = ids
    state = np.random.SeedSequence(entropy, spawn_key=tuple(spawn)).generate_state(2, np.uint32)
    return (int(state[0]) << 32) | int(state[1])


def coordinate_keys(seed: int, replicate_id: int, s: int, salt: int = 0) -> np.ndarray:
    base = derive_key(seed, replicate_id, salt)
    return np.array([mix_int(base ^ mix_int(j + 1)) for j in range(s)], dtype=np.uint64)
