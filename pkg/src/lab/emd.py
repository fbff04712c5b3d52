"""Earth mover's distance between finite distributions over solutions."""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from scipy.optimize import linprog

from ..algorithms import get_algorithm
from ..core.draws import RandomDraws
from ..core.errors import DomainError, InvariantViolation
from ..core.model import Instance, Solution
from ..utils.rng import SeedLike, as_generator

logger = logging.getLogger(__name__)

MASS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Finite distribution over solutions, support sorted by solution order."""

    support: tuple[tuple[Solution, float], ...]

    def __post_init__(self) -> None:
        support = tuple(sorted(self.support, key=lambda pair: pair[0]))
        solutions = [solution for solution, _ in support]
        if len(set(solutions)) != len(solutions):
            raise DomainError("Duplicate solutions in support")
        if any(not 0.0 <= mass <= 1.0 + MASS_TOLERANCE for _, mass in support):
            raise DomainError("Masses must lie in [0, 1]")
        total = sum(mass for _, mass in support)
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise DomainError(f"Masses sum to {total}, expected 1")
        object.__setattr__(self, "support", support)

    @classmethod
    def from_samples(cls, samples: Iterable[Solution]) -> "EmpiricalDistribution":
        counts = Counter(samples)
        total = sum(counts.values())
        if not total:
            raise DomainError("At least one sample is required")
        return cls(tuple((solution, n / total) for solution, n in counts.items()))

    @classmethod
    def point(cls, solution: Solution) -> "EmpiricalDistribution":
        return cls(((solution, 1.0),))

    def __len__(self) -> int:
        return len(self.support)

    def __iter__(self) -> Iterator[tuple[Solution, float]]:
        return iter(self.support)

    @property
    def solutions(self) -> list[Solution]:
        return [solution for solution, _ in self.support]

    @property
    def masses(self) -> np.ndarray:
        return np.array([mass for _, mass in self.support], dtype=float)

    def mass_of(self, solution: Solution) -> float:
        return dict(self.support).get(solution, 0.0)


def hamming_matrix(left: list[Solution], right: list[Solution]) -> np.ndarray:
    return np.array([[a.hamming(b) for b in right] for a in left], dtype=float)


def emd_exact(p: EmpiricalDistribution, q: EmpiricalDistribution) -> float:
    """Optimal transport cost between ``p`` and ``q`` with Hamming ground cost.

    Solved as a transportation LP (HiGHS) with both marginals as equality
    constraints.
    """
    for name, dist in (("P", p), ("Q", q)):
        total = float(dist.masses.sum())
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise DomainError(f"{name} masses sum to {total}, expected 1")

    n, m = len(p), len(q)
    cost = hamming_matrix(p.solutions, q.solutions)
    if n == 1 or m == 1:
        # Only one transport plan exists
        plan = np.outer(p.masses, q.masses)
        return float((cost * plan).sum())

    rows = np.zeros((n, n * m))
    for i in range(n):
        rows[i, i * m : (i + 1) * m] = 1.0
    columns = np.zeros((m, n * m))
    for j in range(m):
        columns[j, j::m] = 1.0

    result = linprog(
        cost.reshape(n * m),
        A_eq=np.vstack([rows, columns]),
        # Renormalized so slack within MASS_TOLERANCE cannot make the LP infeasible
        b_eq=np.concatenate([p.masses / p.masses.sum(), q.masses / q.masses.sum()]),
        bounds=(0, None),
        method="highs",
    )
    if not result.success:
        raise InvariantViolation(f"Transport LP failed: {result.message}")
    return max(float(result.fun), 0.0)


def empirical_distribution(
    algorithm: str,
    instance: Instance,
    trials: int,
    rng: SeedLike = None,
    eps: float = 0.5,
) -> EmpiricalDistribution:
    """Frequency table of the algorithm's outputs over independent runs."""
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    spec = get_algorithm(algorithm)
    rng = as_generator(rng)
    if not spec.randomized:
        return EmpiricalDistribution.point(spec.run(instance, eps, RandomDraws(rng)))

    samples = [spec.run(instance, eps, RandomDraws(rng)) for _ in range(trials)]
    dist = EmpiricalDistribution.from_samples(samples)
    logger.debug(
        "%s: %d trials, support of %d solutions", spec.name, trials, len(dist)
    )
    return dist
