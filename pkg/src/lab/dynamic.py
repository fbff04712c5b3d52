"""Incremental and decremental knapsack in the random-order model.

The maintained solution at each step is a fresh-looking sample of the static
algorithm on the current item set: the previous step's transcript is carried
forward through ``CoupledDraws``, so the new draws depend only on the old
draws and fresh randomness, never on items that have not arrived yet.
"""

import bisect
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Literal, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, PrivateAttr, model_validator
from tqdm import tqdm

from ..algorithms import AlgorithmSpec, get_algorithm
from ..algorithms.fpras import round_values_geometric
from ..core.draws import DrawSource, RandomDraws, ReplayDraws, Transcript
from ..core.errors import DomainError
from ..core.model import EMPTY, Instance, Item, Solution, check_epsilon
from ..core.oracles import brute_force_opt, value_of
from ..utils.config import get_settings
from ..utils.rng import SeedLike, as_generator, spawn_generators
from ..utils.time import Stopwatch
from .coupling import CoupledDraws

logger = logging.getLogger(__name__)

Mode = Literal["incremental", "decremental"]

# Polynomial on any instance; the exhaustive candidate search of "stable" is capped
DEFAULT_FAMILY = "fpras"


def _schema_version() -> int:
    return get_settings().reports.schema_version


class RecourseStep(BaseModel):
    step: int = Field(ge=1)
    item_id: int
    hamming: int = Field(ge=0)
    size: int = Field(ge=0)
    value: float
    reference: float
    reference_kind: Literal["opt", "fopt"]
    wall_time: float = Field(ge=0.0)


class RecourseReport(BaseModel):
    """Per-step recourse of one stream; transcripts stay in memory only."""

    schema_version: int = Field(default_factory=_schema_version)
    family: str
    mode: Mode
    eps: float
    order: list[int]
    per_step: list[RecourseStep]
    amortized_recourse: float
    seed: Optional[int] = None

    _transcripts: tuple[Transcript, ...] = PrivateAttr(default=())
    _solutions: tuple[Solution, ...] = PrivateAttr(default=())

    @model_validator(mode="after")
    def check_amortized(self) -> "RecourseReport":
        if self.per_step:
            mean = sum(step.hamming for step in self.per_step) / len(self.per_step)
            if abs(mean - self.amortized_recourse) > 1e-9 * max(1.0, mean):
                raise ValueError(
                    f"amortized_recourse {self.amortized_recourse} "
                    f"!= mean hamming {mean}"
                )
        return self

    @property
    def transcripts(self) -> tuple[Transcript, ...]:
        """Transcript of the solution after each step (index 0 is step 1)."""
        return self._transcripts

    @property
    def solutions(self) -> tuple[Solution, ...]:
        return self._solutions

    @property
    def hammings(self) -> list[int]:
        return [step.hamming for step in self.per_step]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([step.model_dump() for step in self.per_step])


class EfficiencyIndex:
    """Items kept sorted by efficiency (ties by id) under insertions and deletions."""

    def __init__(self, items: Sequence[Item] = ()) -> None:
        self._keys: list[tuple[float, int]] = []
        self._items: list[Item] = []
        for item in items:
            self.add(item)

    def __len__(self) -> int:
        return len(self._items)

    @staticmethod
    def _key(item: Item) -> tuple[float, int]:
        return (-item.efficiency, item.id)

    def add(self, item: Item) -> None:
        key = self._key(item)
        position = bisect.bisect_left(self._keys, key)
        self._keys.insert(position, key)
        self._items.insert(position, item)

    def remove(self, item: Item) -> None:
        key = self._key(item)
        position = bisect.bisect_left(self._keys, key)
        if position == len(self._keys) or self._keys[position] != key:
            raise DomainError(f"Item {item.id} is not indexed")
        del self._keys[position]
        del self._items[position]

    def fractional_value(self, weight_limit: float) -> float:
        remaining, total = weight_limit, 0.0
        for item in self._items:
            if item.weight <= remaining:
                remaining -= item.weight
                total += item.value
            else:
                total += item.value * max(remaining, 0.0) / item.weight
                break
        return total


def _check_order(
    instance: Instance, order: Sequence[int] | None, rng: np.random.Generator
) -> list[int]:
    if order is None:
        ids = np.array(instance.ids, dtype=np.int64)
        return [int(i) for i in rng.permutation(ids)]
    order = [int(i) for i in order]
    if len(order) != instance.n or sorted(order) != list(instance.ids):
        raise DomainError("order must be a permutation of the instance ids")
    return order


class _Stream:
    """Shared bookkeeping of both stream directions."""

    def __init__(
        self,
        spec: AlgorithmSpec,
        instance: Instance,
        eps: float,
        geometric_rounding: bool,
    ) -> None:
        self.spec = spec
        self.instance = instance
        self.eps = eps
        self.work = (
            round_values_geometric(instance, eps) if geometric_rounding else instance
        )
        self.limit = get_settings().dynamic.exact_reference_limit
        self.index = EfficiencyIndex()
        self.steps: list[RecourseStep] = []
        self.transcripts: list[Transcript] = []
        self.solutions: list[Solution] = []
        self.clock = Stopwatch()

    def run(self, ids: list[int], draws: DrawSource) -> Solution:
        return self.spec.run(self.work.restrict(ids), self.eps, draws)

    def record(
        self,
        item_id: int,
        ids: list[int],
        previous: Solution,
        current: Solution,
        draws: DrawSource,
    ) -> None:
        wall_time = self.clock.lap()
        current_instance = self.instance.restrict(ids)
        if len(ids) <= self.limit:
            reference, kind = brute_force_opt(current_instance)[0], "opt"
        else:
            reference = self.index.fractional_value(self.instance.weight_limit)
            kind = "fopt"
        self.steps.append(
            RecourseStep(
                step=len(self.steps) + 1,
                item_id=item_id,
                hamming=previous.hamming(current),
                size=len(current),
                value=value_of(current_instance, current),
                reference=reference,
                reference_kind=kind,
                wall_time=wall_time,
            )
        )
        self.transcripts.append(draws.transcript)
        self.solutions.append(current)

    def report(self, mode: Mode, order: list[int]) -> RecourseReport:
        hammings = [step.hamming for step in self.steps]
        report = RecourseReport(
            family=self.spec.name,
            mode=mode,
            eps=self.eps,
            order=order,
            per_step=self.steps,
            amortized_recourse=sum(hammings) / len(hammings),
        )
        report._transcripts = tuple(self.transcripts)
        report._solutions = tuple(self.solutions)
        logger.info(
            "%s %s stream of %d items: amortized recourse %.4f",
            mode,
            self.spec.name,
            len(order),
            report.amortized_recourse,
        )
        return report


def stream_simulate(
    full_instance: Instance,
    eps: float,
    rng: SeedLike = None,
    order: Sequence[int] | None = None,
    family: str = DEFAULT_FAMILY,
    geometric_rounding: bool = False,
) -> RecourseReport:
    """Insert items one by one, resampling the solution by one-way transport.

    Step ``k`` couples the run on the first ``k`` items to the transcript of
    the run on the first ``k - 1``; ``X_0`` is empty.
    """
    eps = check_epsilon(eps)
    if full_instance.n == 0:
        raise DomainError("A stream needs at least one item")
    rng = as_generator(rng)
    order = _check_order(full_instance, order, rng)
    stream = _Stream(get_algorithm(family), full_instance, eps, geometric_rounding)

    previous, reference = EMPTY, Transcript()
    for k, item_id in enumerate(order, start=1):
        stream.index.add(full_instance.item(item_id))
        draws = CoupledDraws(reference, rng)
        current = stream.run(order[:k], draws)
        stream.record(item_id, order[:k], previous, current, draws)
        previous, reference = current, draws.transcript

    return stream.report("incremental", order)


def decremental_simulate(
    full_instance: Instance,
    eps: float,
    rng: SeedLike = None,
    order: Sequence[int] | None = None,
    family: str = DEFAULT_FAMILY,
    geometric_rounding: bool = False,
    replay: RecourseReport | None = None,
) -> RecourseReport:
    """Delete items one by one, coupling each run to the previous, larger one.

    The starting solution on the full instance is not counted as recourse.
    With ``replay`` set to an incremental report, the prefix transcripts are
    replayed instead of sampled, deleting in reverse arrival order.
    """
    eps = check_epsilon(eps)
    if full_instance.n == 0:
        raise DomainError("A stream needs at least one item")
    rng = as_generator(rng)

    if replay is not None:
        if replay.mode != "incremental" or len(replay.transcripts) != full_instance.n:
            raise DomainError("replay needs the in-memory report of an incremental run")
        if replay.eps != eps or replay.family != get_algorithm(family).name:
            raise DomainError("replay must use the same eps and family")
        reverse = list(reversed(replay.order))
        if order is not None and [int(i) for i in order] != reverse:
            raise DomainError("order must reverse the replayed arrival order")
        order = reverse
    order = _check_order(full_instance, order, rng)
    stream = _Stream(get_algorithm(family), full_instance, eps, geometric_rounding)

    def draws_for(size: int, reference: Transcript) -> DrawSource:
        if replay is None:
            return CoupledDraws(reference, rng)
        # An empty instance draws nothing the replay could supply
        return ReplayDraws(replay.transcripts[size - 1]) if size else RandomDraws(rng)

    remaining = list(full_instance.ids)
    for item in full_instance:
        stream.index.add(item)
    start = draws_for(len(remaining), Transcript())
    previous = stream.run(remaining, start)
    reference = start.transcript

    for item_id in order:
        remaining.remove(item_id)
        stream.index.remove(full_instance.item(item_id))
        draws = draws_for(len(remaining), reference)
        current = stream.run(remaining, draws)
        stream.record(item_id, remaining, previous, current, draws)
        previous, reference = current, draws.transcript

    return stream.report("decremental", order)


def simulate_streams(
    full_instance: Instance,
    eps: float,
    count: int,
    rng: SeedLike = None,
    family: str = DEFAULT_FAMILY,
    mode: Mode = "incremental",
    threads: int = 1,
    geometric_rounding: bool = False,
    progress: bool = False,
) -> list[RecourseReport]:
    """Independent streams, each with its own child generator."""
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    simulate = stream_simulate if mode == "incremental" else decremental_simulate

    def one(child: np.random.Generator) -> RecourseReport:
        return simulate(
            full_instance,
            eps,
            child,
            family=family,
            geometric_rounding=geometric_rounding,
        )

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        return list(
            tqdm(
                pool.map(one, spawn_generators(rng, count)),
                total=count,
                desc=f"{mode} streams",
                disable=not progress,
            )
        )
