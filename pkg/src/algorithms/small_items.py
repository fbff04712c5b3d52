"""Greedy algorithms for instances made of small items.

``plain_greedy`` is the textbook efficiency-ordered prefix; its output can
change drastically when one item is deleted. ``modified_greedy`` randomizes
the weight limit uniformly in ``[1 - eps, 1]``, which makes the expected
change per deletion ``O(1/eps)``.
"""

import logging
from dataclasses import dataclass
from typing import Union

from ..core.draws import GREEDY_W, DrawSource, Transcript, as_draw_source
from ..core.errors import DomainError
from ..core.model import EMPTY, TOLERANCE, Instance, Solution, check_epsilon
from ..core.oracles import GreedyFill
from ..utils.rng import SeedLike

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GreedyOrder:
    """Item ids by non-increasing efficiency, ties by ascending id."""

    ids: tuple[int, ...]
    efficiencies: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(set(self.ids)) != len(self.ids):
            raise DomainError("GreedyOrder must not repeat ids")
        pairs = zip(self.efficiencies, self.efficiencies[1:])
        if any(later > earlier for earlier, later in pairs):
            raise DomainError("GreedyOrder efficiencies must be non-increasing")


def greedy_order(instance: Instance) -> GreedyOrder:
    fill = GreedyFill(instance)
    return GreedyOrder(fill.ids, tuple(float(e) for e in fill.values / fill.weights))


def plain_greedy(instance: Instance) -> Solution:
    """Maximal efficiency-ordered prefix that fits the weight limit."""
    return GreedyFill(instance).prefix(instance.weight_limit)


def greedy_prefix(
    instance: Instance, W: float, weight_limit: float | None = None
) -> Solution:
    """S(W): the maximal efficiency-ordered prefix of weight at most ``W``.

    ``W`` is a fraction of the weight limit, so on a normalized instance it is
    the absolute budget.
    """
    if not -TOLERANCE <= W <= 1.0 + TOLERANCE:
        raise DomainError(f"W must lie in [0, 1], got {W}")
    limit = instance.weight_limit if weight_limit is None else weight_limit
    return GreedyFill(instance).prefix(W * limit)


def run_modified_greedy(
    fill: GreedyFill, eps: float, draws: DrawSource, weight_limit: float
) -> Solution:
    """Modified greedy on a precomputed order; always consumes the W draw."""
    W = draws.uniform(GREEDY_W, 1.0 - eps, 1.0)
    if weight_limit <= TOLERANCE:
        return EMPTY
    return fill.prefix(W * weight_limit)


def modified_greedy(
    instance: Instance,
    eps: float,
    rng: Union[DrawSource, SeedLike] = None,
    weight_limit: float | None = None,
) -> tuple[Solution, Transcript]:
    """Greedy prefix under a weight limit drawn uniformly from ``[1 - eps, 1]``.

    ``weight_limit`` overrides the instance limit, which is how the general
    algorithm runs it on the small items under the residual capacity.
    """
    eps = check_epsilon(eps)
    draws = as_draw_source(rng)
    limit = instance.weight_limit if weight_limit is None else weight_limit
    solution = run_modified_greedy(GreedyFill(instance), eps, draws, limit)
    return solution, draws.transcript
