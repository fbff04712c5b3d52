"""Knapsack algorithms and the registry the lab and CLI dispatch through."""

from dataclasses import dataclass
from typing import Callable, Union

from ..core.draws import DrawSource, Transcript, as_draw_source
from ..core.errors import DomainError
from ..core.model import Instance, Solution
from ..core.oracles import brute_force_opt
from ..utils.rng import SeedLike
from .fpras import fpras
from .general import stable_knapsack
from .simple import simple_stable
from .small_items import modified_greedy, plain_greedy

RunFn = Callable[[Instance, float, DrawSource], Solution]


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    randomized: bool
    run: RunFn
    description: str


def _run_greedy(instance: Instance, eps: float, draws: DrawSource) -> Solution:
    return plain_greedy(instance)


def _run_modified_greedy(instance: Instance, eps: float, draws: DrawSource) -> Solution:
    return modified_greedy(instance, eps, draws)[0]


def _run_stable(instance: Instance, eps: float, draws: DrawSource) -> Solution:
    return stable_knapsack(instance, eps, draws)[0]


def _run_fpras(instance: Instance, eps: float, draws: DrawSource) -> Solution:
    return fpras(instance, eps, draws)[0]


def _run_simple(instance: Instance, eps: float, draws: DrawSource) -> Solution:
    return simple_stable(instance, eps)


def _run_brute_force(instance: Instance, eps: float, draws: DrawSource) -> Solution:
    return brute_force_opt(instance)[1]


ALGORITHMS: dict[str, AlgorithmSpec] = {
    spec.name: spec
    for spec in (
        AlgorithmSpec("greedy", False, _run_greedy, "efficiency-ordered prefix"),
        AlgorithmSpec(
            "modified-greedy", True, _run_modified_greedy, "greedy with random limit"
        ),
        AlgorithmSpec("stable", True, _run_stable, "exponential-mechanism algorithm"),
        AlgorithmSpec("fpras", True, _run_fpras, "value-rounded stable algorithm"),
        AlgorithmSpec("simple", False, _run_simple, "deterministic, value == weight"),
        AlgorithmSpec("brute-force", False, _run_brute_force, "exact optimum"),
    )
}

ALIASES = {
    "plain-greedy": "greedy",
    "stable-knapsack": "stable",
    "simple-stable": "simple",
    "brute-force-opt": "brute-force",
}


def get_algorithm(name: str) -> AlgorithmSpec:
    key = name.replace("_", "-").lower()
    key = ALIASES.get(key, key)
    try:
        return ALGORITHMS[key]
    except KeyError:
        known = ", ".join(ALGORITHMS)
        raise DomainError(
            f"Unknown algorithm {name!r}; expected one of {known}"
        ) from None


def run_algorithm(
    name: str,
    instance: Instance,
    eps: float,
    rng: Union[DrawSource, SeedLike] = None,
) -> tuple[Solution, Transcript]:
    """Run a registered algorithm and return its output and transcript."""
    spec = get_algorithm(name)
    draws = as_draw_source(rng)
    return spec.run(instance, eps, draws), draws.transcript
