"""Instance and solution data model."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from ..utils.config import tolerance
from .errors import DomainError

# Absolute tolerance for every weight/value comparison against a limit. Read once
# at import: set STABLE_KNAPSACK_TOLERANCE (or .env) before importing the package;
# reload_settings() does not change it.
TOLERANCE: float = tolerance()


@dataclass(frozen=True)
class Item:
    """A knapsack item with a unique, totally ordered identifier."""

    id: int
    value: float
    weight: float

    def __post_init__(self) -> None:
        if not self.weight > 0:
            raise DomainError(
                f"Item {self.id}: weight must be positive, got {self.weight}"
            )
        if not self.value >= 0:
            raise DomainError(
                f"Item {self.id}: value must be nonnegative, got {self.value}"
            )

    @property
    def efficiency(self) -> float:
        return self.value / self.weight


@dataclass(frozen=True)
class Instance:
    """Items in canonical (strictly increasing id) order plus a weight limit."""

    items: tuple[Item, ...]
    weight_limit: float = 1.0
    _index: dict[int, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if not self.weight_limit > 0:
            raise DomainError(f"weight_limit must be positive, got {self.weight_limit}")
        object.__setattr__(self, "items", tuple(self.items))

        index: dict[int, int] = {}
        previous: int | None = None
        for position, item in enumerate(self.items):
            if previous is not None and not item.id > previous:
                raise DomainError(
                    f"Item ids must be strictly increasing, "
                    f"got {item.id} after {previous}"
                )
            if item.weight > self.weight_limit + TOLERANCE:
                raise DomainError(
                    f"Item {item.id}: weight {item.weight} exceeds the weight limit "
                    f"{self.weight_limit}"
                )
            index[item.id] = position
            previous = item.id
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_items(cls, items: Iterable[Item], weight_limit: float = 1.0) -> "Instance":
        """Build an instance from items in any order."""
        return cls(tuple(sorted(items, key=lambda item: item.id)), weight_limit)

    @classmethod
    def from_arrays(
        cls,
        values: Iterable[float],
        weights: Iterable[float],
        weight_limit: float = 1.0,
        ids: Iterable[int] | None = None,
    ) -> "Instance":
        """Build an instance with ids ``1..n`` unless ids are given."""
        values, weights = list(values), list(weights)
        if len(values) != len(weights):
            raise DomainError("values and weights must have the same length")
        id_list = list(ids) if ids is not None else list(range(1, len(values) + 1))
        items = [
            Item(int(i), float(v), float(w))
            for i, v, w in zip(id_list, values, weights)
        ]
        return cls.from_items(items, weight_limit)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Item]:
        return iter(self.items)

    def __contains__(self, item_id: object) -> bool:
        return item_id in self._index

    @property
    def n(self) -> int:
        return len(self.items)

    @cached_property
    def ids(self) -> tuple[int, ...]:
        return tuple(item.id for item in self.items)

    @cached_property
    def values(self) -> np.ndarray:
        values = np.array([item.value for item in self.items], dtype=float)
        values.setflags(write=False)
        return values

    @cached_property
    def weights(self) -> np.ndarray:
        weights = np.array([item.weight for item in self.items], dtype=float)
        weights.setflags(write=False)
        return weights

    def item(self, item_id: int) -> Item:
        try:
            return self.items[self._index[item_id]]
        except KeyError:
            raise DomainError(f"Unknown item id: {item_id}") from None

    def position(self, item_id: int) -> int:
        try:
            return self._index[item_id]
        except KeyError:
            raise DomainError(f"Unknown item id: {item_id}") from None

    def restrict(self, ids: Iterable[int]) -> "Instance":
        """Sub-instance on ``ids`` with the same weight limit."""
        keep = set(ids)
        unknown = keep.difference(self._index)
        if unknown:
            raise DomainError(f"Unknown item ids: {sorted(unknown)}")
        items = tuple(item for item in self.items if item.id in keep)
        return Instance(items, self.weight_limit)

    def without(self, item_id: int) -> "Instance":
        position = self.position(item_id)
        items = self.items[:position] + self.items[position + 1 :]
        return Instance(items, self.weight_limit)

    def with_item(self, item: Item) -> "Instance":
        if item.id in self._index:
            raise DomainError(f"Duplicate item id: {item.id}")
        return Instance.from_items((*self.items, item), self.weight_limit)

    def with_values(self, values: Iterable[float]) -> "Instance":
        """Same ids and weights, new values."""
        items = tuple(
            Item(item.id, float(value), item.weight)
            for item, value in zip(self.items, values, strict=True)
        )
        return Instance(items, self.weight_limit)

    def normalized(self) -> "Instance":
        """Rescale weights so that the weight limit is 1."""
        if self.weight_limit == 1.0:
            return self
        scale = self.weight_limit
        items = tuple(
            Item(item.id, item.value, item.weight / scale) for item in self.items
        )
        return Instance(items, 1.0)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum()) if self.items else 0.0

    @property
    def total_value(self) -> float:
        return float(self.values.sum()) if self.items else 0.0


@dataclass(frozen=True, order=True)
class Solution:
    """A set of item ids; ordering compares sorted id sequences lexicographically."""

    key: tuple[int, ...] = field(init=False, repr=False)
    ids: frozenset[int] = field(default_factory=frozenset, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", frozenset(self.ids))
        object.__setattr__(self, "key", tuple(sorted(self.ids)))

    @classmethod
    def of(cls, ids: Iterable[int]) -> "Solution":
        return cls(ids=frozenset(ids))

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[int]:
        return iter(self.key)

    def __contains__(self, item_id: object) -> bool:
        return item_id in self.ids

    def union(self, other: "Solution") -> "Solution":
        return Solution.of(self.ids | other.ids)

    def hamming(self, other: "Solution") -> int:
        """Size of the symmetric difference."""
        return len(self.ids ^ other.ids)

    def sorted_ids(self) -> list[int]:
        return list(self.key)


EMPTY = Solution()


def check_epsilon(eps: float) -> float:
    """Validate an accuracy parameter in the open interval (0, 1)."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    return float(eps)
