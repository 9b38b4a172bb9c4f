"""Deterministic RNG stream derivation.

Every stochastic operation in this package draws from a child stream of a
single master seed. Streams are keyed by structured integer tuples via
``numpy``'s SeedSequence spawn keys, so a stream depends only on
(master seed, key) and never on the order in which streams are created.
Replicates and parallel workers therefore produce identical results
regardless of scheduling.
"""

from __future__ import annotations

import numpy as np

SeedLike = "int | np.random.SeedSequence | np.random.Generator"


def seed_sequence(seed) -> np.random.SeedSequence:
    """Normalize an int or SeedSequence to a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (int, np.integer)):
        if seed < 0:
            raise ValueError(f"seed must be nonnegative, got {seed}")
        return np.random.SeedSequence(int(seed))
    raise TypeError(f"expected int or SeedSequence, got {type(seed).__name__}")


def child_sequence(seed, *key: int) -> np.random.SeedSequence:
    """Child stream of `seed` keyed by `key` (counter-based split).

    Children with distinct keys are statistically independent; the same
    (seed, key) always names the same stream.
    """
    base = seed_sequence(seed)
    for k in key:
        if int(k) < 0:
            raise ValueError(f"stream key components must be nonnegative, got {key}")
    spawn_key = tuple(base.spawn_key) + tuple(int(k) for k in key)
    return np.random.SeedSequence(entropy=base.entropy, spawn_key=spawn_key)


def generator(seed, *key: int) -> np.random.Generator:
    """Generator for the (seed, key) stream; passes Generators through untouched."""
    if isinstance(seed, np.random.Generator):
        if key:
            raise ValueError("cannot derive a keyed child from a live Generator")
        return seed
    return np.random.default_rng(child_sequence(seed, *key))
