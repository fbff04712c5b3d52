"""Shared fixtures and reference oracles for the test suite."""

from fractions import Fraction

import numpy as np
import pytest

from src.core.model import Instance
from src.instances.generators import gen_random


def rational_fopt(instance: Instance) -> Fraction:
    """Fractional optimum in exact rational arithmetic (LP vertex by greedy fill)."""
    items = sorted(
        instance,
        key=lambda item: (-Fraction(item.value) / Fraction(item.weight), item.id),
    )
    remaining = Fraction(instance.weight_limit)
    total = Fraction(0)
    for item in items:
        weight, value = Fraction(item.weight), Fraction(item.value)
        if weight <= remaining:
            remaining -= weight
            total += value
        else:
            total += value * remaining / weight
            break
    return total


def small_random_instances(count: int, n_max: int, seed: int = 0) -> list[Instance]:
    """Random instances with 1..n_max items and seeds derived from ``seed``."""
    rng = np.random.default_rng(seed)
    return [
        gen_random(int(rng.integers(1, n_max + 1)), seed=int(rng.integers(2**31)))
        for _ in range(count)
    ]


@pytest.fixture
def tiny_instance() -> Instance:
    """Five items with distinct efficiencies; optimum {1, 2} by hand."""
    return Instance.from_arrays(
        values=[0.9, 0.8, 0.5, 0.3, 0.1],
        weights=[0.5, 0.45, 0.4, 0.35, 0.2],
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
