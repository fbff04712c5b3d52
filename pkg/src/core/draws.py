"""Labeled random draws and the transcripts that record them.

Every algorithm takes its randomness from a ``DrawSource``. A source hands out
one draw per stage label and keeps a ``Transcript`` of ``(stage, draw, law)``
entries, which is enough to replay a run or to couple it with another run.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Iterator, Sequence, Union

import numpy as np

from ..utils.rng import SeedLike, as_generator
from .errors import DomainError

THRESHOLD_C = "threshold_c"
EXP_MECH_T = "exp_mech_t"
GREEDY_W = "greedy_W"
ROUND_DELTA = "round_delta"


@dataclass(frozen=True)
class UniformLaw:
    low: float
    high: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.low) and np.isfinite(self.high)) or not (
            self.high > self.low
        ):
            raise DomainError(f"Degenerate interval [{self.low}, {self.high}]")

    @property
    def length(self) -> float:
        return self.high - self.low

    def density(self, x: float) -> float:
        return 1.0 / self.length if self.low <= x <= self.high else 0.0


@dataclass(frozen=True)
class CategoricalLaw:
    probs: tuple[float, ...]

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "CategoricalLaw":
        return cls(tuple(float(p) for p in normalize_simplex(weights)))

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class FixedLaw:
    """A value injected by the caller rather than sampled."""

    value: float


Law = Union[UniformLaw, CategoricalLaw, FixedLaw]


@dataclass(frozen=True)
class TranscriptEntry:
    stage: str
    draw: float
    law: Law | None = None
    # True when the draw was taken over from a reference run
    coalesced: bool = False


@dataclass(frozen=True)
class Transcript:
    """Ordered record of the draws one run made."""

    entries: tuple[TranscriptEntry, ...] = ()

    def __iter__(self) -> Iterator[TranscriptEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def stages(self) -> list[str]:
        return [entry.stage for entry in self.entries]

    def get(self, stage: str) -> TranscriptEntry | None:
        for entry in self.entries:
            if entry.stage == stage:
                return entry
        return None

    def draws(self) -> list[tuple[str, float]]:
        return [(entry.stage, entry.draw) for entry in self.entries]

    def to_records(self) -> list[dict[str, Any]]:
        """JSON-friendly list of ``{"stage", "draw"}`` records."""
        return [
            {
                "stage": entry.stage,
                "draw": int(entry.draw) if entry.stage == EXP_MECH_T else entry.draw,
            }
            for entry in self.entries
        ]


def normalize_simplex(weights: Sequence[float]) -> np.ndarray:
    probs = np.asarray(weights, dtype=float)
    if probs.ndim != 1 or not len(probs):
        raise DomainError("A categorical law needs at least one entry")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise DomainError("Probability masses must be finite and nonnegative")
    total = probs.sum()
    if not total > 0:
        raise DomainError("Probability masses sum to zero")
    return probs / total


def sample_categorical(probs: Sequence[float], rng: np.random.Generator) -> int:
    """Inverse-CDF draw; zero-mass indices are never returned."""
    cumulative = np.cumsum(np.asarray(probs, dtype=float))
    u = rng.random() * cumulative[-1]
    index = int(np.searchsorted(cumulative, u, side="right"))
    # Guard against u landing on the last boundary by rounding
    last_positive = int(np.flatnonzero(np.asarray(probs) > 0)[-1])
    return min(index, last_positive)


class DrawSource(ABC):
    """Hands out labeled draws and records them."""

    def __init__(self) -> None:
        self._entries: list[TranscriptEntry] = []

    @property
    def transcript(self) -> Transcript:
        return Transcript(tuple(self._entries))

    def uniform(self, stage: str, low: float, high: float) -> float:
        law = UniformLaw(float(low), float(high))
        draw, coalesced = self._uniform(stage, law)
        self._entries.append(TranscriptEntry(stage, draw, law, coalesced))
        return draw

    def categorical(self, stage: str, probs: Sequence[float]) -> int:
        law = CategoricalLaw.from_weights(probs)
        draw, coalesced = self._categorical(stage, law)
        self._entries.append(TranscriptEntry(stage, float(draw), law, coalesced))
        return draw

    def fixed(self, stage: str, value: float) -> float:
        entry = TranscriptEntry(stage, float(value), FixedLaw(value), True)
        self._entries.append(entry)
        return float(value)

    @abstractmethod
    def _uniform(self, stage: str, law: UniformLaw) -> tuple[float, bool]:
        ...

    @abstractmethod
    def _categorical(self, stage: str, law: CategoricalLaw) -> tuple[int, bool]:
        ...


class RandomDraws(DrawSource):
    """Fresh independent draws from a numpy generator."""

    def __init__(self, rng: SeedLike = None) -> None:
        super().__init__()
        self.rng = as_generator(rng)

    def _uniform(self, stage: str, law: UniformLaw) -> tuple[float, bool]:
        return float(self.rng.uniform(law.low, law.high)), False

    def _categorical(self, stage: str, law: CategoricalLaw) -> tuple[int, bool]:
        return sample_categorical(law.probs, self.rng), False


class ReplayDraws(DrawSource):
    """Replays the draws of a recorded transcript stage by stage."""

    def __init__(self, transcript: Transcript) -> None:
        super().__init__()
        self.source = transcript

    def _lookup(self, stage: str) -> float:
        entry = self.source.get(stage)
        if entry is None:
            raise DomainError(f"Transcript has no draw for stage {stage!r}")
        return entry.draw

    def _uniform(self, stage: str, law: UniformLaw) -> tuple[float, bool]:
        return self._lookup(stage), True

    def _categorical(self, stage: str, law: CategoricalLaw) -> tuple[int, bool]:
        return int(self._lookup(stage)), True


def as_draw_source(rng: Union[DrawSource, SeedLike]) -> DrawSource:
    """Accept a ``DrawSource`` as is, wrap anything else into ``RandomDraws``."""
    if isinstance(rng, DrawSource):
        return rng
    return RandomDraws(rng)
