"""Maximal couplings of uniform and categorical laws.

Each coupling comes in two forms: a joint sampler returning both draws, and a
conditional sampler that maps a draw of the first law to a draw of the
second. The conditional form is what makes a transport one-way computable:
it only needs the earlier run's recorded draw and fresh randomness.
"""

import logging
from typing import Sequence

import numpy as np

from ..core.draws import (
    CategoricalLaw,
    DrawSource,
    Transcript,
    UniformLaw,
    sample_categorical,
)
from ..core.errors import DomainError
from ..utils.rng import SeedLike, as_generator

logger = logging.getLogger(__name__)

# Masses below this are treated as an empty residual.
_MASS_EPS = 1e-12
# Simplex vectors must sum to one within this slack.
_SIMPLEX_SLACK = 1e-9


def overlap_mass(law1: UniformLaw, law2: UniformLaw) -> float:
    """Integral of ``min(f1, f2)``: the probability that a maximal coupling agrees."""
    overlap = min(law1.high, law2.high) - max(law1.low, law2.low)
    if overlap <= 0:
        return 0.0
    return overlap * min(1.0 / law1.length, 1.0 / law2.length)


def conditional_uniform(
    x1: float, law1: UniformLaw, law2: UniformLaw, rng: np.random.Generator
) -> tuple[float, bool]:
    """Draw ``x2`` given ``x1 ~ law1`` so ``(x1, x2)`` is a maximal coupling."""
    f1, f2 = 1.0 / law1.length, 1.0 / law2.length
    if law2.low <= x1 <= law2.high and rng.random() < min(1.0, f2 / f1):
        return x1, True

    # Residual density (f2 - f1)+ as piecewise-constant segments
    pieces: list[tuple[float, float, float]] = []
    overlap_low, overlap_high = max(law1.low, law2.low), min(law1.high, law2.high)
    if overlap_high > overlap_low:
        if f2 > f1:
            pieces.append((overlap_low, overlap_high, f2 - f1))
        if law2.low < overlap_low:
            pieces.append((law2.low, overlap_low, f2))
        if overlap_high < law2.high:
            pieces.append((overlap_high, law2.high, f2))
    else:
        pieces.append((law2.low, law2.high, f2))

    masses = [(high - low) * density for low, high, density in pieces]
    if sum(masses) <= _MASS_EPS:
        return x1, True
    low, high, _ = pieces[sample_categorical(masses, rng)]
    return float(rng.uniform(low, high)), False


def maximal_coupling_uniform(
    a1: float, b1: float, a2: float, b2: float, rng: SeedLike = None
) -> tuple[float, float, bool]:
    """Jointly draw from Uniform[a1, b1] and Uniform[a2, b2], agreeing maximally."""
    rng = as_generator(rng)
    law1, law2 = UniformLaw(a1, b1), UniformLaw(a2, b2)
    x1 = float(rng.uniform(law1.low, law1.high))
    x2, shared = conditional_uniform(x1, law1, law2, rng)
    return x1, x2, shared


def _simplex(probs: Sequence[float], name: str) -> np.ndarray:
    vector = np.asarray(probs, dtype=float)
    if vector.ndim != 1 or not len(vector):
        raise DomainError(f"{name} must be a nonempty vector")
    if np.any(vector < 0):
        raise DomainError(f"{name} has negative mass")
    if abs(vector.sum() - 1.0) > _SIMPLEX_SLACK:
        raise DomainError(f"{name} sums to {vector.sum()}, expected 1")
    return vector


def _pad(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    size = max(len(p), len(q))
    return np.pad(p, (0, size - len(p))), np.pad(q, (0, size - len(q)))


def conditional_categorical(
    i: int, p: Sequence[float], q: Sequence[float], rng: np.random.Generator
) -> tuple[int, bool]:
    """Draw ``j`` given ``i ~ p`` so that ``(i, j)`` is maximally coupled.

    Indices are matched position by position; the shorter vector is padded
    with zero mass.
    """
    p_full, q_full = _pad(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
    if p_full[i] > 0 and rng.random() < min(1.0, q_full[i] / p_full[i]):
        return i, True

    residual = np.clip(q_full - p_full, 0.0, None)
    if residual.sum() <= _MASS_EPS:
        return i, True
    return sample_categorical(residual, rng), False


def maximal_coupling_categorical(
    p: Sequence[float], q: Sequence[float], rng: SeedLike = None
) -> tuple[int, int, bool]:
    """Jointly draw ``i ~ p`` and ``j ~ q`` with ``P(i = j) = sum(min(p, q))``."""
    rng = as_generator(rng)
    p_vec, q_vec = _simplex(p, "p"), _simplex(q, "q")
    i = sample_categorical(p_vec, rng)
    j, shared = conditional_categorical(i, p_vec, q_vec, rng)
    return i, j, shared


class CoupledDraws(DrawSource):
    """Draws for a second run, coupled stage by stage to a reference transcript.

    Uniform stages use the maximal coupling with the reference draw of the
    same stage (identical laws therefore share the draw). Categorical stages
    are coupled only while every earlier uniform stage was shared; otherwise
    they are drawn independently. Stages absent from the reference are
    drawn fresh. In every case each draw has its own law as marginal.
    """

    def __init__(self, reference: Transcript, rng: SeedLike = None) -> None:
        super().__init__()
        self.reference = reference
        self.rng = as_generator(rng)
        self._all_shared = True

    def _uniform(self, stage: str, law: UniformLaw) -> tuple[float, bool]:
        entry = self.reference.get(stage)
        if entry is None or not isinstance(entry.law, UniformLaw):
            self._all_shared = False
            return float(self.rng.uniform(law.low, law.high)), False
        draw, shared = conditional_uniform(entry.draw, entry.law, law, self.rng)
        self._all_shared &= shared
        return draw, shared

    def _categorical(self, stage: str, law: CategoricalLaw) -> tuple[int, bool]:
        entry = self.reference.get(stage)
        if (
            entry is None
            or not isinstance(entry.law, CategoricalLaw)
            or not self._all_shared
        ):
            return sample_categorical(law.probs, self.rng), False
        return conditional_categorical(
            int(entry.draw), entry.law.probs, law.probs, self.rng
        )
