"""Polynomial-time variant of the stable knapsack algorithm.

Values are rounded down to multiples of a randomly drawn unit ``delta`` so the
candidate sets can be found with a dynamic program over integer value sums.
Weights and the weight limit are left untouched.
"""

import logging
import math
from typing import Union

import numpy as np

from ..core.draws import ROUND_DELTA, DrawSource, Transcript, as_draw_source
from ..core.errors import DomainError
from ..core.model import EMPTY, TOLERANCE, Instance, Solution, check_epsilon
from ..core.oracles import ensure_feasible, fractional_opt
from ..utils.rng import SeedLike
from .general import stable_knapsack

logger = logging.getLogger(__name__)


def round_values(instance: Instance, delta: float) -> Instance:
    """Replace each value ``v`` by ``floor(v / delta)``."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    return instance.with_values(np.floor(instance.values / delta))


def round_values_geometric(instance: Instance, eps: float) -> Instance:
    """Round each positive value down to an integer power of ``1 / (1 - eps)``.

    Every value shrinks by a factor of at most ``1 - eps``; zero stays zero.
    """
    eps = check_epsilon(eps)
    log_base = -math.log1p(-eps)
    rounded = []
    for value in instance.values:
        if value <= 0:
            rounded.append(0.0)
            continue
        exponent = math.floor(math.log(value) / log_base)
        power = math.exp(exponent * log_base)
        # Floating error can push the power just above the value
        while power > value:
            exponent -= 1
            power = math.exp(exponent * log_base)
        rounded.append(power)
    return instance.with_values(rounded)


def fpras(
    instance: Instance,
    eps: float,
    rng: Union[DrawSource, SeedLike] = None,
    delta: float | None = None,
) -> tuple[Solution, Transcript]:
    """``(1 - eps)``-approximation in time polynomial in ``n`` and ``1 / eps``.

    ``delta`` pins the rounding unit instead of sampling it; the transcript
    still records it under the rounding stage.
    """
    eps = check_epsilon(eps)
    draws = as_draw_source(rng)
    work = instance.normalized()

    fopt = fractional_opt(work).value
    if work.n == 0 or fopt <= TOLERANCE:
        return EMPTY, draws.transcript

    eps_prime = eps / 5
    unit = fopt * eps_prime / work.n
    if delta is None:
        delta = draws.uniform(ROUND_DELTA, unit, 2 * unit)
    elif delta > 0:
        draws.fixed(ROUND_DELTA, delta)
    else:
        raise DomainError(f"delta must be positive, got {delta}")

    rounded = round_values(work, delta)
    logger.debug(
        "Rounded %d values with delta=%.6g, max rounded value %d",
        work.n,
        delta,
        int(rounded.values.max()),
    )
    solution, _ = stable_knapsack(rounded, eps_prime, draws, candidate_solver="dp")
    return ensure_feasible(work, solution), draws.transcript
