"""Splittable seeded randomness.

Every run derives all of its randomness from one root seed. Independent
substreams are addressed by integer key paths instead of by draw order, so a
Monte Carlo trial gets the same stream no matter which worker runs it or in
which order trials complete.
"""
from __future__ import annotations

import secrets

import numpy as np

__all__ = ["substream", "derive_seed", "fresh_entropy_seed"]

# Stream addresses used by the session machinery. Keeping them in one table
# avoids accidental collisions between key paths.
KEY_CODEBOOK = 1
KEY_PREPARE = 2
KEY_NOISE_BOB = 3
KEY_NOISE_SONAI = 4
KEY_LIE_BOB = 5
KEY_LIE_SONAI = 6
KEY_TRIAL = 7
KEY_BLOCK = 8


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream addressed by ``key`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def derive_seed(seed: int, *key: int) -> int:
    """A new root seed derived from ``seed`` at ``key`` (for nested runs)."""
    state = np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def fresh_entropy_seed() -> int:
    """Draw a root seed from OS entropy (used when the caller gave none)."""
    return secrets.randbits(63)
