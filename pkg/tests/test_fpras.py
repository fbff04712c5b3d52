"""Tests for the value-rounded stable algorithm."""

import math
import time

import numpy as np
import pytest

from src.algorithms.fpras import fpras, round_values, round_values_geometric
from src.algorithms.general import stable_knapsack
from src.core.draws import (
    EXP_MECH_T,
    GREEDY_W,
    ROUND_DELTA,
    THRESHOLD_C,
    FixedLaw,
    UniformLaw,
)
from src.core.errors import DomainError
from src.core.model import EMPTY, Instance
from src.core.oracles import (
    brute_force_opt,
    ensure_feasible,
    fractional_opt,
    is_feasible,
    value_of,
)
from src.instances.generators import gen_random
from src.lab.sensitivity import mc_sensitivity_upper, theoretical_bound
from tests.conftest import small_random_instances


class TestRounding:
    """Arithmetic and geometric value rounding."""

    def test_round_values(self):
        """Values become floor(v / delta); weights are untouched."""
        instance = Instance.from_arrays([1.0, 0.5], [0.3, 0.4])
        rounded = round_values(instance, 0.3)
        np.testing.assert_array_equal(rounded.values, [3.0, 1.0])
        np.testing.assert_array_equal(rounded.weights, instance.weights)

    def test_round_values_rejects_bad_delta(self):
        """delta must be positive."""
        instance = Instance.from_arrays([1.0], [0.5])
        with pytest.raises(DomainError):
            round_values(instance, 0.0)

    def test_geometric_bounds(self):
        """Each value shrinks by at most a factor 1 - eps onto a power grid."""
        eps = 0.2
        rng = np.random.default_rng(3)
        values = np.concatenate(([0.0, 1.0], rng.uniform(1e-4, 50.0, size=200)))
        instance = Instance.from_arrays(values, np.full(len(values), 0.001))
        rounded = round_values_geometric(instance, eps).values
        base = 1.0 / (1.0 - eps)
        assert rounded[0] == 0.0
        for original, value in zip(values[1:], rounded[1:]):
            assert (1 - eps) * original - 1e-12 <= value <= original
            exponent = math.log(value) / math.log(base)
            assert exponent == pytest.approx(round(exponent), abs=1e-6)


class TestFpras:
    """The rounded algorithm end to end."""

    def test_transcript_and_delta_range(self, tiny_instance):
        """delta is drawn from [fopt eps' / n, 2 fopt eps' / n] before the rest."""
        eps = 0.5
        _, transcript = fpras(tiny_instance, eps, rng=2)
        assert transcript.stages == [ROUND_DELTA, THRESHOLD_C, EXP_MECH_T, GREEDY_W]
        unit = fractional_opt(tiny_instance).value * (eps / 5) / tiny_instance.n
        entry = transcript.get(ROUND_DELTA)
        assert entry.law == UniformLaw(unit, 2 * unit)
        assert unit <= entry.draw <= 2 * unit

    def test_injected_delta(self, tiny_instance):
        """A pinned delta is recorded with a fixed law."""
        _, transcript = fpras(tiny_instance, 0.5, rng=2, delta=0.01)
        entry = transcript.get(ROUND_DELTA)
        assert entry.draw == 0.01
        assert isinstance(entry.law, FixedLaw)
        with pytest.raises(DomainError):
            fpras(tiny_instance, 0.5, rng=2, delta=-1.0)

    def test_matches_stable_on_rounded_instance(self):
        """With delta pinned, fpras is the stable algorithm on rounded values."""
        eps = 0.5
        for index, instance in enumerate(small_random_instances(15, 8, seed=20)):
            unit = fractional_opt(instance).value * (eps / 5) / instance.n
            delta = 1.5 * unit
            expected, _ = stable_knapsack(
                round_values(instance, delta), eps / 5, rng=index, candidate_solver="dp"
            )
            solution, _ = fpras(instance, eps, rng=index, delta=delta)
            assert solution == ensure_feasible(instance, expected)

    def test_rounding_loss(self):
        """The rounded optimum, scaled back, keeps (1 - 4 eps') of opt."""
        eps = 0.5
        eps_prime = eps / 5
        for instance in small_random_instances(30, 10, seed=21):
            opt = brute_force_opt(instance)[0]
            delta = 2 * fractional_opt(instance).value * eps_prime / instance.n
            rounded_opt = brute_force_opt(round_values(instance, delta))[0]
            assert rounded_opt * delta >= (1 - 4 * eps_prime) * opt - 1e-9

    def test_empty_and_zero_value(self):
        """Nothing to round means no draws."""
        solution, transcript = fpras(Instance.from_arrays([], []), 0.5, rng=0)
        assert solution == EMPTY
        assert len(transcript) == 0
        solution, transcript = fpras(Instance.from_arrays([0.0], [0.5]), 0.5, rng=0)
        assert solution == EMPTY
        assert len(transcript) == 0

    def test_feasible_with_scaled_limit(self):
        """Outputs respect a non-unit weight limit."""
        instance = Instance.from_arrays(
            [4.0, 3.0, 2.0], [3.0, 2.0, 2.0], weight_limit=5
        )
        for seed in range(20):
            solution, _ = fpras(instance, 0.5, rng=seed)
            assert is_feasible(instance, solution)

    def test_expected_approximation(self):
        """Mean value is at least (1 - eps) opt."""
        eps = 0.5
        for index, instance in enumerate(small_random_instances(10, 8, seed=22)):
            opt = brute_force_opt(instance)[0]
            rng = np.random.default_rng(index)
            runs = [fpras(instance, eps, rng)[0] for _ in range(100)]
            values = np.array([value_of(instance, solution) for solution in runs])
            stderr = values.std(ddof=1) / np.sqrt(len(values))
            assert values.mean() >= (1 - eps) * opt - 3 * stderr - 1e-9


class TestFprasStability:
    """Coupled sensitivity and running time of the rounded algorithm."""

    def test_coupled_sensitivity_within_bound(self):
        """The coupled estimate stays below the proven bound plus sampling error."""
        eps = 0.5
        bound = theoretical_bound("fpras", eps)
        assert bound is not None
        for index, instance in enumerate(small_random_instances(3, 6, seed=23)):
            if instance.n < 2:
                continue
            report = mc_sensitivity_upper("fpras", instance, eps, trials=50, rng=index)
            assert report.average <= bound + 3 * report.ci_halfwidth

    @pytest.mark.slow
    def test_runtime_is_polynomial(self):
        """Doubling n costs at most a cubic factor, with slack for timer noise."""
        timings = []
        for n in (50, 100, 200, 400):
            instance = gen_random(n, seed=n)
            best = math.inf
            for seed in range(3):
                start = time.perf_counter()
                fpras(instance, 0.5, rng=seed)
                best = min(best, time.perf_counter() - start)
            timings.append(max(best, 0.01))
        for smaller, larger in zip(timings, timings[1:]):
            assert larger <= 4 * 2**3 * smaller
