"""Exact and fractional knapsack oracles.

Everything here is deterministic and side-effect free. Exhaustive searches are
vectorized with numpy subset-sum tables and resolve ties by the
lexicographically smallest sorted id sequence.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple

import numpy as np

from ..utils.config import get_settings
from .errors import DomainError, InvariantViolation, SizeError
from .model import TOLERANCE, Instance, Solution

logger = logging.getLogger(__name__)

# Low half of the subset enumeration, vectorized in one numpy array.
_LOW_BITS = 16


def value_of(instance: Instance, solution: Solution) -> float:
    """Total value of ``solution``."""
    return float(sum(instance.item(item_id).value for item_id in solution))


def weight_of(instance: Instance, solution: Solution) -> float:
    """Total weight of ``solution``."""
    return float(sum(instance.item(item_id).weight for item_id in solution))


def is_feasible(
    instance: Instance, solution: Solution, weight_limit: float | None = None
) -> bool:
    limit = instance.weight_limit if weight_limit is None else weight_limit
    return weight_of(instance, solution) <= limit + TOLERANCE


def ensure_feasible(instance: Instance, solution: Solution) -> Solution:
    """Raise ``InvariantViolation`` unless ``solution`` fits the instance."""
    if not is_feasible(instance, solution):
        raise InvariantViolation(
            f"Infeasible solution: weight {weight_of(instance, solution)} exceeds "
            f"limit {instance.weight_limit}"
        )
    return solution


def delete_item(instance: Instance, item_id: int) -> Instance:
    """The instance with one item removed."""
    return instance.without(item_id)


class FractionalOpt(NamedTuple):
    value: float
    break_index: int
    fraction: float


class GreedyFill:
    """Items in non-increasing efficiency order (ties by id) with prefix sums.

    Serves both the fractional optimum and the greedy prefixes, for any
    weight limit, in O(log n) per query after an O(n log n) sort.
    """

    def __init__(self, instance: Instance) -> None:
        self.instance = instance
        ids = np.array(instance.ids, dtype=np.int64)
        values, weights = instance.values, instance.weights
        order = np.lexsort((ids, -(values / weights))) if len(ids) else ids
        self.ids: tuple[int, ...] = tuple(int(i) for i in ids[order])
        self.values = values[order]
        self.weights = weights[order]
        self.cum_weights = np.cumsum(self.weights)
        self.cum_values = np.cumsum(self.values)

    def __len__(self) -> int:
        return len(self.ids)

    def prefix_length(self, weight_limit: float) -> int:
        """Number of leading items whose cumulative weight fits ``weight_limit``."""
        return int(
            np.searchsorted(self.cum_weights, weight_limit + TOLERANCE, side="right")
        )

    def prefix(self, weight_limit: float) -> Solution:
        return Solution.of(self.ids[: self.prefix_length(weight_limit)])

    def fractional(self, weight_limit: float) -> FractionalOpt:
        if weight_limit < 0:
            raise DomainError(f"weight limit must be nonnegative, got {weight_limit}")
        n = len(self.ids)
        t = self.prefix_length(weight_limit)
        value = float(self.cum_values[t - 1]) if t else 0.0
        if t == n:
            return FractionalOpt(value, n, 0.0)

        used = float(self.cum_weights[t - 1]) if t else 0.0
        fraction = min(max((weight_limit - used) / float(self.weights[t]), 0.0), 1.0)
        return FractionalOpt(value + fraction * float(self.values[t]), t, fraction)


def fractional_opt(
    instance: Instance, weight_limit: float | None = None
) -> FractionalOpt:
    """Optimum of the LP relaxation by the efficiency-ordered greedy fill."""
    limit = instance.weight_limit if weight_limit is None else weight_limit
    if limit < 0:
        raise DomainError(f"weight limit must be nonnegative, got {limit}")
    return GreedyFill(instance).fractional(limit)


def _subset_sums(x: np.ndarray) -> np.ndarray:
    """``sums[mask]`` = sum of ``x[j]`` over bits ``j`` set in ``mask``."""
    sums = np.zeros(1)
    for value in x:
        sums = np.concatenate((sums, sums + value))
    return sums


class SubsetTable:
    """Exhaustive enumeration of all subsets of a small instance.

    Subsets are bit masks over canonical positions. The low ``_LOW_BITS``
    positions are enumerated as one numpy block; the high positions are
    iterated, so memory stays bounded for the largest allowed caps.
    """

    def __init__(self, instance: Instance, cap: int) -> None:
        if instance.n > cap:
            raise SizeError(
                f"Exhaustive search over {instance.n} items exceeds the cap of {cap}"
            )
        self.instance = instance
        n = instance.n
        self.low_bits = min(n, _LOW_BITS)
        values, weights = instance.values, instance.weights
        ones = np.ones(n)

        self._low = (
            _subset_sums(values[: self.low_bits]),
            _subset_sums(weights[: self.low_bits]),
            _subset_sums(ones[: self.low_bits]),
        )
        self._high = (
            _subset_sums(values[self.low_bits :]),
            _subset_sums(weights[self.low_bits :]),
            _subset_sums(ones[self.low_bits :]),
        )

    def blocks(self) -> Iterator[tuple[int, np.ndarray, np.ndarray, np.ndarray]]:
        """Yield ``(mask_offset, values, weights, sizes)`` per block."""
        low_v, low_w, low_s = self._low
        high_v, high_w, high_s = self._high
        for high in range(len(high_v)):
            yield (
                high << self.low_bits,
                low_v + high_v[high],
                low_w + high_w[high],
                low_s + high_s[high],
            )

    def to_solution(self, mask: int) -> Solution:
        ids = self.instance.ids
        return Solution.of(ids[j] for j in range(len(ids)) if mask >> j & 1)

    def _mask_key(self, mask: int) -> tuple[int, ...]:
        ids = self.instance.ids
        return tuple(ids[j] for j in range(len(ids)) if mask >> j & 1)

    def best(
        self,
        select: Callable[
            [np.ndarray, np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]
        ],
    ) -> Solution | None:
        """Maximize an objective over accepted subsets.

        ``select(values, weights, sizes)`` returns an acceptance mask and the
        objective per subset. Objectives within tolerance of the maximum tie,
        and ties go to the lexicographically smallest id sequence.
        """
        best: float | None = None
        pool: list[tuple[np.ndarray, np.ndarray]] = []
        for offset, values, weights, sizes in self.blocks():
            accepted, objective = select(values, weights, sizes)
            index = np.flatnonzero(accepted)
            if not len(index):
                continue
            scores = objective[index]
            block_best = float(scores.max())
            near = scores >= block_best - TOLERANCE
            pool.append((scores[near], index[near] + offset))
            best = block_best if best is None else max(best, block_best)

        if best is None:
            return None
        masks = [
            int(mask)
            for scores, block_masks in pool
            for mask in block_masks[scores >= best - TOLERANCE]
        ]
        return self.to_solution(min(masks, key=self._mask_key))

    def max_value(
        self, weight_limit: float, max_size: int | None = None
    ) -> Solution:
        """Max-value subset with weight within ``weight_limit`` (and size cap)."""

        def select(
            values: np.ndarray, weights: np.ndarray, sizes: np.ndarray
        ) -> tuple[np.ndarray, np.ndarray]:
            accepted = weights <= weight_limit + TOLERANCE
            if max_size is not None:
                accepted &= sizes <= max_size
            return accepted, values

        # The empty set is always accepted
        solution = self.best(select)
        assert solution is not None
        return solution

    def min_weight_in_window(
        self, low: float, high: float, weight_limit: float
    ) -> Solution | None:
        """Min-weight subset with value in ``[low, high)`` and weight within limit."""

        def select(
            values: np.ndarray, weights: np.ndarray, sizes: np.ndarray
        ) -> tuple[np.ndarray, np.ndarray]:
            accepted = (
                (values >= low - TOLERANCE)
                & (values < high - TOLERANCE)
                & (weights <= weight_limit + TOLERANCE)
            )
            return accepted, -weights

        return self.best(select)


def brute_force_opt(
    instance: Instance, cap: int | None = None
) -> tuple[float, Solution]:
    """Exact optimum by exhaustive enumeration (reference oracle)."""
    cap = get_settings().caps.brute_force if cap is None else cap
    solution = SubsetTable(instance, cap).max_value(instance.weight_limit)
    return value_of(instance, solution), solution


def integer_values(instance: Instance) -> np.ndarray:
    """Item values as int64, or ``DomainError`` if any value is fractional."""
    values = instance.values
    if len(values) and not np.all(values == np.floor(values)):
        raise DomainError("Item values must be nonnegative integers")
    return values.astype(np.int64)


@dataclass(frozen=True)
class MinWeightTable:
    """Min-weight-per-exact-value-sum table with lexicographic reconstruction.

    ``layers[j, s]`` is the minimum weight of a subset of the items at
    canonical positions ``j..n-1`` whose values sum to exactly ``s``.
    """

    instance: Instance
    values: np.ndarray
    layers: np.ndarray

    @property
    def value_cap(self) -> int:
        return self.layers.shape[1] - 1

    @property
    def minweight(self) -> np.ndarray:
        return self.layers[0]

    def reconstruct(self, value_sum: int) -> Solution | None:
        """Lexicographically smallest min-weight subset with the given value sum."""
        if not 0 <= value_sum <= self.value_cap or not np.isfinite(
            self.layers[0, value_sum]
        ):
            return None

        weights = self.instance.weights
        chosen: list[int] = []
        remaining = value_sum
        for j, item_id in enumerate(self.instance.ids):
            value = int(self.values[j])
            if value > remaining:
                continue
            # Taking the smallest remaining id first keeps the sequence smallest
            if (
                self.layers[j + 1, remaining - value] + weights[j]
                <= self.layers[j, remaining] + TOLERANCE
            ):
                chosen.append(item_id)
                remaining -= value

        if remaining != 0:
            raise InvariantViolation(f"Reconstruction of value sum {value_sum} failed")
        return Solution.of(chosen)


def integer_value_opt(
    instance: Instance, value_cap: int | None = None
) -> MinWeightTable:
    """Dynamic program over value sums for integer-valued instances."""
    values = integer_values(instance)
    if value_cap is None:
        value_cap = int(values.sum()) if len(values) else 0
    if value_cap < 0:
        raise DomainError(f"value_cap must be nonnegative, got {value_cap}")

    n = instance.n
    weights = instance.weights
    layers = np.full((n + 1, value_cap + 1), np.inf)
    layers[n, 0] = 0.0
    for j in reversed(range(n)):
        following = layers[j + 1]
        current = following.copy()
        value = int(values[j])
        if 0 < value <= value_cap:
            current[value:] = np.minimum(
                following[value:], following[: value_cap + 1 - value] + weights[j]
            )
        layers[j] = current

    logger.debug("Value DP over %d items with cap %d", n, value_cap)
    layers.setflags(write=False)
    return MinWeightTable(instance, values, layers)
