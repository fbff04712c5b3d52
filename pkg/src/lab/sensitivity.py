"""Average sensitivity measurement.

Deterministic algorithms are measured exactly (one run per deletion).
Randomized ones get an upper bound from coupled runs: any coupling of the two
output distributions overpays the earth mover's distance, so the mean Hamming
distance under ``CoupledDraws`` bounds it from above.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Literal, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator
from tqdm import tqdm

from ..algorithms import AlgorithmSpec, get_algorithm
from ..algorithms.general import internal_epsilon
from ..core.draws import RandomDraws
from ..core.errors import DomainError
from ..core.model import Instance, Solution, check_epsilon
from ..utils.config import get_settings
from ..utils.rng import SeedLike, as_generator, spawn_generators
from .coupling import CoupledDraws
from .emd import emd_exact, empirical_distribution

logger = logging.getLogger(__name__)

Method = Literal["exact", "coupled_mc", "exact_emd"]
DeterministicAlgorithm = Union[str, Callable[[Instance], Solution]]


def _schema_version() -> int:
    return get_settings().reports.schema_version


class DeletionEstimate(BaseModel):
    estimate: float = Field(ge=0.0)
    ci_halfwidth: float = Field(default=0.0, ge=0.0)


class SensitivityReport(BaseModel):
    """Per-deletion estimates and their mean."""

    schema_version: int = Field(default_factory=_schema_version)
    algorithm: str
    method: Method
    eps: Optional[float] = None
    trials: int = Field(ge=1)
    per_deletion: dict[int, DeletionEstimate]
    average: float
    bound: Optional[float] = None
    seed: Optional[int] = None

    @model_validator(mode="after")
    def check_average(self) -> "SensitivityReport":
        if self.per_deletion:
            mean = float(np.mean([e.estimate for e in self.per_deletion.values()]))
            if abs(mean - self.average) > 1e-9 * max(1.0, abs(mean)):
                raise ValueError(f"average {self.average} != mean of estimates {mean}")
        return self

    @classmethod
    def from_estimates(
        cls, per_deletion: dict[int, DeletionEstimate], **fields: object
    ) -> "SensitivityReport":
        if not per_deletion:
            raise DomainError("Average sensitivity needs at least one item")
        ordered = dict(sorted(per_deletion.items()))
        average = float(np.mean([e.estimate for e in ordered.values()]))
        return cls(
            per_deletion=ordered, average=average, **fields  # type: ignore[arg-type]
        )

    @property
    def ci_halfwidth(self) -> float:
        """Half-width for the average, treating deletions as independent."""
        widths = np.array([e.ci_halfwidth for e in self.per_deletion.values()])
        return float(np.sqrt(np.sum(widths**2)) / len(widths)) if len(widths) else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "id": item_id,
                    "estimate": entry.estimate,
                    "ci": entry.ci_halfwidth,
                    "trials": self.trials,
                }
                for item_id, entry in self.per_deletion.items()
            ],
            columns=["id", "estimate", "ci", "trials"],
        )


def theoretical_bound(family: str, eps: float) -> float | None:
    """Proven average sensitivity bound for a family, None when there is none."""
    eps = check_epsilon(eps)
    name = get_algorithm(family).name
    if name == "modified-greedy":
        return 1.0 / eps + 1.0
    if name == "simple":
        return 1.0 / eps + 2.0
    if name in ("stable", "fpras"):
        inner = internal_epsilon(eps if name == "stable" else eps / 5)
        bound = 12.0 / inner * math.log(1.0 / inner)
        return bound + 2.0 if name == "fpras" else bound
    return None


def _deterministic_runner(
    algorithm: DeterministicAlgorithm, eps: float
) -> tuple[str, Callable[[Instance], Solution]]:
    if callable(algorithm):
        return getattr(algorithm, "__name__", "custom"), algorithm
    spec = get_algorithm(algorithm)
    if spec.randomized:
        raise DomainError(f"{spec.name} is randomized; use mc_sensitivity_upper")
    return spec.name, lambda instance: spec.run(instance, eps, RandomDraws(0))


def deterministic_sensitivity(
    algorithm: DeterministicAlgorithm, instance: Instance, eps: float = 0.5
) -> SensitivityReport:
    """Exact average of ``|A(V) ^ A(V - i)|`` over all deletions ``i``."""
    if instance.n == 0:
        raise DomainError("Average sensitivity is undefined for an empty instance")
    name, run = _deterministic_runner(algorithm, eps)
    full = run(instance)
    per_deletion = {
        item_id: DeletionEstimate(estimate=full.hamming(run(instance.without(item_id))))
        for item_id in instance.ids
    }
    return SensitivityReport.from_estimates(
        per_deletion, algorithm=name, method="exact", eps=eps, trials=1
    )


def coupled_run(
    family: str,
    instance: Instance,
    deleted_id: int,
    shared_seed: SeedLike = None,
    eps: float = 0.5,
) -> tuple[Solution, Solution]:
    """Run on ``V`` and on ``V - {deleted_id}`` with stage-wise coupled draws."""
    spec = get_algorithm(family)
    smaller = instance.without(deleted_id)
    return _coupled_pair(spec, instance, smaller, eps, as_generator(shared_seed))


def _coupled_pair(
    spec: AlgorithmSpec,
    instance: Instance,
    smaller: Instance,
    eps: float,
    rng: np.random.Generator,
) -> tuple[Solution, Solution]:
    reference = RandomDraws(rng)
    full = spec.run(instance, eps, reference)
    reduced = spec.run(smaller, eps, CoupledDraws(reference.transcript, rng))
    return full, reduced


def _estimate(samples: np.ndarray, z: float) -> DeletionEstimate:
    if len(samples) < 2:
        return DeletionEstimate(estimate=float(samples.mean()))
    stderr = float(samples.std(ddof=1)) / math.sqrt(len(samples))
    return DeletionEstimate(estimate=float(samples.mean()), ci_halfwidth=z * stderr)


def mc_sensitivity_upper(
    family: str,
    instance: Instance,
    eps: float,
    trials: int | None = None,
    rng: SeedLike = None,
    threads: int = 1,
    progress: bool = False,
) -> SensitivityReport:
    """Coupled Monte Carlo upper bound on the average sensitivity.

    Each deletion gets its own child generator, so the report does not
    depend on ``threads``.
    """
    eps = check_epsilon(eps)
    settings = get_settings().sensitivity
    trials = settings.default_trials if trials is None else trials
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    if instance.n == 0:
        raise DomainError("Average sensitivity is undefined for an empty instance")
    spec = get_algorithm(family)
    runs = trials if spec.randomized else 1

    def measure(job: tuple[int, np.random.Generator]) -> DeletionEstimate:
        item_id, child = job
        smaller = instance.without(item_id)
        distances = np.empty(runs)
        for trial in range(runs):
            full, reduced = _coupled_pair(spec, instance, smaller, eps, child)
            distances[trial] = full.hamming(reduced)
        return _estimate(distances, settings.ci_z)

    jobs = list(zip(instance.ids, spawn_generators(rng, instance.n)))
    logger.info(
        "Coupled sensitivity of %s: %d deletions x %d trials",
        spec.name,
        len(jobs),
        runs,
    )
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        results = list(
            tqdm(
                pool.map(measure, jobs),
                total=len(jobs),
                desc=f"{spec.name} deletions",
                disable=not progress,
            )
        )

    return SensitivityReport.from_estimates(
        {item_id: estimate for (item_id, _), estimate in zip(jobs, results)},
        algorithm=spec.name,
        method="coupled_mc",
        eps=eps,
        trials=trials,
        bound=theoretical_bound(spec.name, eps),
    )


def emd_sensitivity(
    family: str,
    instance: Instance,
    eps: float,
    trials: int | None = None,
    rng: SeedLike = None,
) -> SensitivityReport:
    """Exact EMD between empirical output distributions, per deletion.

    A cross-check for the coupled bound on small instances; the plug-in
    estimate carries sampling bias, so no interval is reported.
    """
    eps = check_epsilon(eps)
    trials = get_settings().sensitivity.default_trials if trials is None else trials
    if instance.n == 0:
        raise DomainError("Average sensitivity is undefined for an empty instance")
    spec = get_algorithm(family)
    children = spawn_generators(rng, instance.n + 1)
    full = empirical_distribution(spec.name, instance, trials, children[0], eps)
    per_deletion = {
        item_id: DeletionEstimate(
            estimate=emd_exact(
                full,
                empirical_distribution(
                    spec.name, instance.without(item_id), trials, child, eps
                ),
            )
        )
        for item_id, child in zip(instance.ids, children[1:])
    }
    return SensitivityReport.from_estimates(
        per_deletion,
        algorithm=spec.name,
        method="exact_emd",
        eps=eps,
        trials=trials,
        bound=theoretical_bound(spec.name, eps),
    )
