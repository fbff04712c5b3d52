"""Deterministic stable algorithm for the simple knapsack (value equals weight)."""

import logging
import math

import numpy as np

from ..core.errors import DomainError, SizeError
from ..core.model import EMPTY, TOLERANCE, Instance, Solution, check_epsilon
from ..core.oracles import SubsetTable, ensure_feasible, weight_of
from ..utils.config import get_settings

logger = logging.getLogger(__name__)

# Above this many large items the vectorized enumeration gives way to a DFS.
_VECTORIZED_LIMIT = 22


def is_simple(instance: Instance) -> bool:
    return bool(np.all(np.abs(instance.values - instance.weights) <= TOLERANCE))


def _bounded_search(large: Instance, max_size: int, weight_limit: float) -> Solution:
    """Best subset of at most ``max_size`` items, visited in lexicographic order."""
    ids, values, weights = large.ids, large.values, large.weights
    best_value = -math.inf
    best: tuple[int, ...] = ()
    chosen: list[int] = []

    def visit(start: int, weight: float, value: float) -> None:
        nonlocal best_value, best
        if value > best_value + TOLERANCE:
            best_value, best = value, tuple(chosen)
        if len(chosen) == max_size:
            return
        for j in range(start, len(ids)):
            if weight + weights[j] <= weight_limit + TOLERANCE:
                chosen.append(ids[j])
                visit(j + 1, weight + weights[j], value + values[j])
                chosen.pop()

    visit(0, 0.0, 0.0)
    return Solution.of(best)


def best_large_subset(
    large: Instance, max_size: int, cap: int | None = None
) -> Solution:
    """Optimal subset of the large items with at most ``max_size`` members."""
    cap = get_settings().caps.simple_large if cap is None else cap
    if large.n > cap:
        raise SizeError(f"{large.n} large items exceed the cap of {cap}")
    if large.n <= _VECTORIZED_LIMIT:
        return SubsetTable(large, cap).max_value(large.weight_limit, max_size)
    return _bounded_search(large, max_size, large.weight_limit)


def simple_stable(instance: Instance, eps: float) -> Solution:
    """Optimal large part plus the lightest small items that still fit.

    Large items weigh at least ``eps``. Small items are taken in ascending
    weight order (ties by id) until the next one no longer fits.
    """
    eps = check_epsilon(eps)
    if not is_simple(instance):
        raise DomainError("simple_stable needs value == weight for every item")
    work = instance.normalized()
    if work.n == 0:
        return EMPTY

    large_ids = [item.id for item in work if item.weight >= eps - TOLERANCE]
    large = work.restrict(large_ids)
    core = best_large_subset(large, math.floor(1 / eps + TOLERANCE))

    small = [item for item in work if item.weight < eps - TOLERANCE]
    small.sort(key=lambda item: (item.weight, item.id))
    residual = work.weight_limit - weight_of(large, core)
    cumulative = np.cumsum([item.weight for item in small])
    k = int(np.searchsorted(cumulative, residual + TOLERANCE, side="right"))

    logger.debug(
        "simple_stable: %d large items, core of %d, %d small items taken",
        large.n,
        len(core),
        k,
    )
    return ensure_feasible(work, Solution.of([*core, *(item.id for item in small[:k])]))
