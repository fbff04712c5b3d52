"""Seeded random number helpers."""

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def as_generator(seed: SeedLike = None) -> np.random.Generator:
    """Turn a seed, seed sequence or generator into a ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def fresh_seed() -> int:
    """Draw a seed from OS entropy (echoed by the CLI for reproducibility)."""
    return int(np.random.SeedSequence().entropy % (2**63))


def spawn_generators(seed: SeedLike, count: int) -> list[np.random.Generator]:
    """Derive ``count`` independent child generators.

    A ``Generator`` parent contributes one draw of entropy, so the children
    depend only on the parent's state and never on how they are consumed.
    """
    if isinstance(seed, np.random.Generator):
        sequence = np.random.SeedSequence(int(seed.integers(0, 2**63)))
    elif isinstance(seed, np.random.SeedSequence):
        sequence = seed
    else:
        sequence = np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in sequence.spawn(count)]
