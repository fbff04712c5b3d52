"""Canonical and random instance families."""

import logging
import math
import re
from dataclasses import dataclass

import numpy as np

from ..core.errors import DomainError
from ..core.model import TOLERANCE, Instance, check_epsilon
from ..utils.rng import SeedLike, as_generator

logger = logging.getLogger(__name__)

# Lower clamp for sampled weights; the upper clamp is the weight limit 1.
MIN_WEIGHT = 1e-6

_DISTRIBUTION = re.compile(r"^\s*(uniform|pareto)\s*\(([^)]*)\)\s*$", re.IGNORECASE)


def gen_prop2(k: int) -> Instance:
    """Instance on which plain greedy has average sensitivity ``(k + 1) / 2``.

    Ids ``1..k`` weigh ``1/k`` with value ``1/k``; ids ``k+1..2k`` weigh
    ``1/k**2`` with value ``1/k**3``.
    """
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    values = [1 / k] * k + [1 / k**3] * k
    weights = [1 / k] * k + [1 / k**2] * k
    return Instance.from_arrays(values, weights)


def lower_bound_k(eps: float) -> int:
    return int(math.floor(1 / (8 * check_epsilon(eps)) + TOLERANCE))


def gen_lowerbound(eps: float | None = None, *, k: int | None = None) -> Instance:
    """Instance forcing average sensitivity of order ``1 / eps``.

    ``V1`` (ids ``1..k``) has ``k`` items of weight ``1/k`` and value 1,
    ``V2`` (ids ``k+1..2k-1``) has ``k - 1`` items of weight ``1/(k-1)`` and
    value ``(2k - 1)/(2k - 2)``. With ``k = floor(1 / (8 eps))`` unless ``k``
    is given directly.
    """
    if (eps is None) == (k is None):
        raise DomainError("Pass exactly one of eps and k")
    if k is None:
        assert eps is not None
        k = lower_bound_k(eps)
    if k < 2:
        raise DomainError(f"k = {k} is too small; the instance needs k >= 2")
    values = [1.0] * k + [(2 * k - 1) / (2 * k - 2)] * (k - 1)
    weights = [1 / k] * k + [1 / (k - 1)] * (k - 1)
    return Instance.from_arrays(values, weights)


def lower_bound_sensitivity(k: int) -> float:
    """Sensitivity any ``(1 - eps)``-approximation shows on ``gen_lowerbound``."""
    if k < 2:
        raise DomainError(f"k must be at least 2, got {k}")
    return k * (k - 1) / (8 * (2 * k - 1))


@dataclass(frozen=True)
class Distribution:
    """``uniform(lo, hi)`` or ``pareto(alpha)`` (Lomax, support ``[0, inf)``)."""

    name: str
    params: tuple[float, ...]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.name == "uniform":
            low, high = self.params
            return rng.uniform(low, high, size=n)
        (alpha,) = self.params
        return rng.pareto(alpha, size=n)

    def __str__(self) -> str:
        return f"{self.name}({','.join(format(p, 'g') for p in self.params)})"


def parse_distribution(spec: str) -> Distribution:
    match = _DISTRIBUTION.match(spec)
    if not match:
        raise DomainError(
            f"Unknown distribution {spec!r}; expected uniform(lo,hi) or pareto(alpha)"
        )
    name = match.group(1).lower()
    try:
        params = tuple(float(p) for p in match.group(2).split(",") if p.strip())
    except ValueError:
        raise DomainError(f"Non-numeric parameters in {spec!r}") from None

    if name == "uniform":
        if len(params) != 2:
            raise DomainError(f"uniform takes two parameters, got {spec!r}")
        low, high = params
        if not (math.isfinite(low) and math.isfinite(high)) or not 0 <= low < high:
            raise DomainError(f"uniform needs 0 <= lo < hi, got {spec!r}")
    else:
        if len(params) != 1 or not params[0] > 0 or not math.isfinite(params[0]):
            raise DomainError(f"pareto takes one positive parameter, got {spec!r}")
    return Distribution(name, params)


def gen_random(
    n: int,
    value_dist: str = "uniform(0,1)",
    weight_dist: str = "uniform(0,1)",
    seed: SeedLike = None,
    simple: bool = False,
) -> Instance:
    """Random instance with ids ``1..n``; weights clamped to ``(0, 1]``.

    With ``simple`` every value equals its weight and ``value_dist`` is
    ignored.
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    values_from = parse_distribution(value_dist)
    weights_from = parse_distribution(weight_dist)
    rng = as_generator(seed)
    weights = np.clip(weights_from.sample(rng, n), MIN_WEIGHT, 1.0)
    values = weights.copy() if simple else values_from.sample(rng, n)
    logger.debug(
        "Random instance: n=%d, values %s, weights %s, simple=%s",
        n,
        values_from,
        weights_from,
        simple,
    )
    return Instance.from_arrays(values, weights)

