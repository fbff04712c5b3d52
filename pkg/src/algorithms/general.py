"""Stable-on-average knapsack for general instances.

The algorithm draws a value threshold ``c`` relative to the fractional
optimum, splits items into large (value at least ``c``) and small ones, builds
one min-weight candidate set of large items per value window ``[tc, (t+1)c)``,
picks a window with the exponential mechanism and fills the residual capacity
with the modified greedy over the small items.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence, Union

import numpy as np

from ..core.draws import (
    EXP_MECH_T,
    THRESHOLD_C,
    DrawSource,
    Transcript,
    as_draw_source,
)
from ..core.errors import DomainError
from ..core.model import EMPTY, TOLERANCE, Instance, Solution, check_epsilon
from ..core.oracles import (
    GreedyFill,
    SubsetTable,
    ensure_feasible,
    fractional_opt,
    integer_value_opt,
    value_of,
    weight_of,
)
from ..utils.config import get_settings
from ..utils.rng import SeedLike
from .small_items import run_modified_greedy

logger = logging.getLogger(__name__)

CandidateQuery = Callable[[int, float], Union[Solution, None]]


def internal_epsilon(eps: float) -> float:
    """Accuracy used inside the algorithm so the overall ratio is ``1 - eps``."""
    return min(0.05, check_epsilon(eps) / 12.0)


def large_items(instance: Instance, c: float) -> frozenset[int]:
    """Ids of items with positive value at least ``c``."""
    if not c > 0:
        raise DomainError(f"threshold c must be positive, got {c}")
    return frozenset(
        item.id for item in instance if item.value > 0 and item.value >= c - TOLERANCE
    )


class CandidateSolver(Protocol):
    """Finds min-weight subsets of the large items per value window."""

    name: str

    def prepare(self, large: Instance, value_cap: float) -> CandidateQuery:
        """Return ``query(t, c)`` for window sums below ``value_cap``."""
        ...


class ExactCandidateSolver:
    """Exhaustive search; exponential in the number of large items."""

    name = "exact"

    def __init__(self, cap: int | None = None) -> None:
        self.cap = get_settings().caps.candidate_exact if cap is None else cap

    def prepare(self, large: Instance, value_cap: float) -> CandidateQuery:
        table = SubsetTable(large, self.cap)

        def query(t: int, c: float) -> Solution | None:
            return table.min_weight_in_window(t * c, (t + 1) * c, large.weight_limit)

        return query


class DynamicProgrammingCandidateSolver:
    """Min-weight-per-value-sum DP; needs integer item values."""

    name = "dp"

    def prepare(self, large: Instance, value_cap: float) -> CandidateQuery:
        cap = max(int(math.ceil(value_cap - TOLERANCE)), 0)
        table = integer_value_opt(large, cap)
        minweight = table.minweight

        def query(t: int, c: float) -> Solution | None:
            # Integer sums s with tc <= s < (t+1)c, same tolerance as the exact search
            low = max(int(math.ceil(t * c - TOLERANCE)), 0)
            high = min(int(math.ceil((t + 1) * c - TOLERANCE)), table.value_cap + 1)
            if low >= high:
                return None
            segment = minweight[low:high]
            feasible = segment <= large.weight_limit + TOLERANCE
            if not feasible.any():
                return None
            best = float(segment[feasible].min())
            sums = low + np.flatnonzero(feasible & (segment <= best + TOLERANCE))
            candidates = [table.reconstruct(int(s)) for s in sums]
            return min(solution for solution in candidates if solution is not None)

        return query


CANDIDATE_SOLVERS: dict[str, Callable[[], CandidateSolver]] = {
    ExactCandidateSolver.name: ExactCandidateSolver,
    DynamicProgrammingCandidateSolver.name: DynamicProgrammingCandidateSolver,
}


def resolve_solver(solver: Union[str, CandidateSolver]) -> CandidateSolver:
    if isinstance(solver, str):
        try:
            return CANDIDATE_SOLVERS[solver]()
        except KeyError:
            raise DomainError(f"Unknown candidate solver: {solver!r}") from None
    return solver


def candidate_exact(
    large: Instance, t: int, c: float, cap: int | None = None
) -> Solution | None:
    """Min-weight subset of ``large`` with value in ``[tc, (t+1)c)``, by enumeration."""
    return ExactCandidateSolver(cap).prepare(large, (t + 1) * c)(t, c)


def candidate_dp(large: Instance, t: int, c: float) -> Solution | None:
    """Same contract as ``candidate_exact`` for integer-valued items, by DP."""
    return DynamicProgrammingCandidateSolver().prepare(large, (t + 1) * c)(t, c)


@dataclass(frozen=True)
class CandidateEntry:
    solution: Solution
    value: float
    weight: float
    score: float


@dataclass(frozen=True)
class CandidateTable:
    """Candidate sets ``A_t`` and scores ``x_t`` for one threshold ``c``."""

    c: float
    l: int
    large: frozenset[int]
    entries: tuple[CandidateEntry | None, ...]
    small_fill: GreedyFill = field(repr=False, compare=False)

    @property
    def scores(self) -> list[float]:
        return [-math.inf if entry is None else entry.score for entry in self.entries]


def build_candidate_table(
    instance: Instance,
    c: float,
    solver: Union[str, CandidateSolver] = "exact",
    fopt: float | None = None,
) -> CandidateTable:
    """Build ``A_t``/``x_t`` for ``t = 0..floor(fopt / c)``."""
    solver = resolve_solver(solver)
    if fopt is None:
        fopt = fractional_opt(instance).value
    large_ids = large_items(instance, c)
    large = instance.restrict(large_ids)
    small = instance.restrict(i for i in instance.ids if i not in large_ids)
    small_fill = GreedyFill(small)

    l = int(math.floor(fopt / c))
    query = solver.prepare(large, (l + 1) * c)

    entries: list[CandidateEntry | None] = []
    for t in range(l + 1):
        candidate = query(t, c)
        if candidate is None:
            entries.append(None)
            continue
        weight = weight_of(large, candidate)
        residual = max(instance.weight_limit - weight, 0.0)
        score = t * c + small_fill.fractional(residual).value
        entries.append(
            CandidateEntry(candidate, value_of(large, candidate), weight, score)
        )

    logger.debug(
        "Candidate table: c=%.6g, l=%d, %d large items, %d windows filled",
        c,
        l,
        len(large_ids),
        sum(entry is not None for entry in entries),
    )
    return CandidateTable(c, l, large_ids, tuple(entries), small_fill)


def exponential_weights(scores: Sequence[float], d: float) -> np.ndarray:
    """Probabilities proportional to ``exp(score / d)``; ``-inf`` gets zero."""
    if not d > 0:
        raise DomainError(f"d must be positive, got {d}")
    values = np.asarray(scores, dtype=float)
    if np.any(np.isnan(values)) or np.any(values == np.inf):
        raise DomainError("Scores must be finite or -inf")
    finite = np.isfinite(values)
    if not finite.any():
        raise DomainError("At least one score must be finite")
    shifted = np.where(finite, values - values[finite].max(), -np.inf)
    weights = np.exp(shifted / d)
    return weights / weights.sum()


def exponential_mechanism(
    scores: Sequence[float],
    d: float,
    rng: Union[DrawSource, SeedLike] = None,
    stage: str = EXP_MECH_T,
) -> int:
    """Sample an index with probability proportional to ``exp(score / d)``."""
    return as_draw_source(rng).categorical(stage, exponential_weights(scores, d))


def stable_knapsack(
    instance: Instance,
    eps: float,
    rng: Union[DrawSource, SeedLike] = None,
    candidate_solver: Union[str, CandidateSolver] = "exact",
) -> tuple[Solution, Transcript]:
    """Randomized ``(1 - eps)``-approximation with low average sensitivity."""
    eps_int = internal_epsilon(eps)
    draws = as_draw_source(rng)
    solver = resolve_solver(candidate_solver)
    work = instance.normalized()

    fopt = fractional_opt(work).value
    if fopt <= TOLERANCE:
        return EMPTY, draws.transcript

    c = draws.uniform(THRESHOLD_C, eps_int * fopt, 2 * eps_int * fopt)
    table = build_candidate_table(work, c, solver, fopt=fopt)

    d = c / (10 * math.log(1 / eps_int))
    chosen = exponential_mechanism(table.scores, d, draws)
    entry = table.entries[chosen]
    assert entry is not None

    residual = work.weight_limit - entry.weight
    small = run_modified_greedy(table.small_fill, eps_int, draws, residual)
    solution = ensure_feasible(work, entry.solution.union(small))
    return solution, draws.transcript
