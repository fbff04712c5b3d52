"""Tests for incremental and decremental recourse simulation."""

import itertools

import numpy as np
import pytest
from scipy import stats

from src.algorithms import get_algorithm
from src.algorithms.small_items import greedy_prefix
from src.core.draws import RandomDraws
from src.core.errors import DomainError
from src.core.model import EMPTY, Instance, Item
from src.core.oracles import fractional_opt, is_feasible
from src.instances.generators import gen_random
from src.lab.dynamic import (
    DEFAULT_FAMILY,
    EfficiencyIndex,
    decremental_simulate,
    simulate_streams,
    stream_simulate,
)
from src.lab.sensitivity import theoretical_bound


class TestEfficiencyIndex:
    """Sorted items under insertions and deletions."""

    def test_matches_fractional_opt(self):
        """The incremental fill equals the static fractional optimum."""
        instance = gen_random(30, seed=12)
        rng = np.random.default_rng(0)
        index = EfficiencyIndex()
        present: list[int] = []
        for item_id in rng.permutation(instance.ids):
            index.add(instance.item(int(item_id)))
            present.append(int(item_id))
            expected = fractional_opt(instance.restrict(present)).value
            assert index.fractional_value(1.0) == pytest.approx(expected)
        for item_id in list(present[::2]):
            index.remove(instance.item(item_id))
            present.remove(item_id)
            expected = fractional_opt(instance.restrict(present)).value
            assert index.fractional_value(1.0) == pytest.approx(expected)

    def test_remove_unknown(self):
        """Removing an absent item is a domain error."""
        index = EfficiencyIndex([Item(1, 1.0, 0.5)])
        with pytest.raises(DomainError):
            index.remove(Item(2, 1.0, 0.5))


class TestIncremental:
    """Insertion streams."""

    def test_single_item(self):
        """One arrival, one step, recourse equals the solution size."""
        instance = Instance.from_arrays([1.0], [0.5])
        report = stream_simulate(instance, 0.5, rng=0)
        assert len(report.per_step) == 1
        step = report.per_step[0]
        assert step.hamming == step.size == len(report.solutions[0])
        assert report.amortized_recourse == step.hamming

    def test_report_consistency(self, tiny_instance):
        """Amortized recourse is the mean Hamming distance between steps."""
        report = stream_simulate(tiny_instance, 0.5, rng=1)
        assert report.mode == "incremental"
        assert sorted(report.order) == list(tiny_instance.ids)
        assert report.amortized_recourse == pytest.approx(np.mean(report.hammings))
        previous = EMPTY
        for step, solution in zip(report.per_step, report.solutions):
            assert step.hamming == previous.hamming(solution)
            assert step.reference_kind == "opt"
            assert step.value <= step.reference + 1e-9
            previous = solution
        frame = report.to_frame()
        assert list(frame["step"]) == [1, 2, 3, 4, 5]

    def test_given_order(self, tiny_instance):
        """An explicit order is followed; a bad one is rejected."""
        report = stream_simulate(tiny_instance, 0.5, rng=2, order=[5, 4, 3, 2, 1])
        assert [step.item_id for step in report.per_step] == [5, 4, 3, 2, 1]
        with pytest.raises(DomainError):
            stream_simulate(tiny_instance, 0.5, rng=2, order=[1, 1, 2, 3, 4])
        with pytest.raises(DomainError):
            stream_simulate(tiny_instance, 0.5, rng=2, order=[1, 2])

    def test_empty_instance(self):
        """A stream needs items."""
        with pytest.raises(DomainError):
            stream_simulate(Instance.from_arrays([], []), 0.5, rng=0)

    def test_fopt_reference_beyond_limit(self):
        """Large prefixes are compared against the fractional optimum."""
        instance = gen_random(14, seed=13)
        report = stream_simulate(instance, 0.5, rng=3, family="modified-greedy")
        kinds = [step.reference_kind for step in report.per_step]
        assert kinds == ["opt"] * 12 + ["fopt"] * 2

    def test_geometric_rounding(self):
        """Rounded runs stay feasible and report original values."""
        instance = gen_random(8, seed=14)
        report = stream_simulate(
            instance, 0.5, rng=4, family="fpras", geometric_rounding=True
        )
        for step, solution in zip(report.per_step, report.solutions):
            assert is_feasible(instance, solution)
            assert step.value == pytest.approx(
                sum(instance.item(i).value for i in solution)
            )


class TestDecremental:
    """Deletion streams."""

    def test_single_item(self):
        """Deleting the only item removes it from the solution if present."""
        instance = Instance.from_arrays([1.0], [0.5])
        report = decremental_simulate(instance, 0.5, rng=0, family="modified-greedy")
        assert len(report.per_step) == 1
        assert report.per_step[0].size == 0
        assert report.solutions[0] == EMPTY

    def test_replay_reverses_incremental(self, tiny_instance):
        """Replaying prefix transcripts gives the reversed recourse sequence."""
        incremental = stream_simulate(tiny_instance, 0.5, rng=5)
        decremental = decremental_simulate(
            tiny_instance, 0.5, rng=6, replay=incremental
        )
        assert decremental.order == incremental.order[::-1]
        assert decremental.hammings == incremental.hammings[::-1]
        assert decremental.solutions[-1] == EMPTY

    def test_replay_mismatch(self, tiny_instance):
        """Replay needs the same eps, family and an incremental report."""
        incremental = stream_simulate(tiny_instance, 0.5, rng=5)
        with pytest.raises(DomainError):
            decremental_simulate(tiny_instance, 0.25, rng=6, replay=incremental)
        with pytest.raises(DomainError):
            decremental_simulate(
                tiny_instance, 0.5, rng=6, family="stable", replay=incremental
            )
        decremental = decremental_simulate(tiny_instance, 0.5, rng=6)
        with pytest.raises(DomainError):
            decremental_simulate(tiny_instance, 0.5, rng=6, replay=decremental)


class TestManyStreams:
    """Independent streams in parallel."""

    def test_thread_count_does_not_matter(self, tiny_instance):
        """Child generators make the streams independent of threads."""
        one = simulate_streams(tiny_instance, 0.5, 4, rng=7)
        four = simulate_streams(tiny_instance, 0.5, 4, rng=7, threads=4)
        assert [r.hammings for r in one] == [r.hammings for r in four]
        assert [r.order for r in one] == [r.order for r in four]

    def test_decremental_mode(self, tiny_instance):
        """The mode switch selects deletion streams."""
        reports = simulate_streams(tiny_instance, 0.5, 2, rng=8, mode="decremental")
        assert all(report.mode == "decremental" for report in reports)

    def test_count_validated(self, tiny_instance):
        """At least one stream."""
        with pytest.raises(DomainError):
            simulate_streams(tiny_instance, 0.5, 0, rng=0)

    @pytest.mark.slow
    def test_final_solution_has_static_law(self):
        """After the last arrival the solution follows the static algorithm."""
        instance = gen_random(5, seed=15)
        streams = simulate_streams(instance, 0.5, 3000, rng=9, family="stable")
        final = [report.solutions[-1] for report in streams]
        rng = np.random.default_rng(10)
        spec = get_algorithm("stable")
        static = [spec.run(instance, 0.5, RandomDraws(rng)) for _ in range(3000)]
        support = sorted(set(final) | set(static))
        if len(support) > 1:
            table = np.array(
                [[final.count(s) for s in support], [static.count(s) for s in support]]
            )
            assert stats.chi2_contingency(table).pvalue > 1e-3


class TestStreamGuarantees:
    """Approximation, marginals and recourse of maintained solutions."""

    def test_default_family_scales(self):
        """The default family runs streams beyond toy sizes."""
        instance = gen_random(40, seed=16)
        report = stream_simulate(instance, 0.25, rng=0)
        assert report.family == DEFAULT_FAMILY
        assert len(report.per_step) == instance.n

    def test_expected_value_per_step(self):
        """Every prefix solution is (1 - eps)-approximate in expectation."""
        eps = 0.5
        instance = gen_random(8, seed=17)
        order = list(instance.ids)
        reports = [
            stream_simulate(instance, eps, rng=seed, order=order, family="stable")
            for seed in range(200)
        ]
        for k in range(instance.n):
            values = np.array([report.per_step[k].value for report in reports])
            opt = reports[0].per_step[k].reference
            assert reports[0].per_step[k].reference_kind == "opt"
            stderr = values.std(ddof=1) / np.sqrt(len(values))
            assert values.mean() >= (1 - eps) * opt - 3 * stderr - 1e-9

    @pytest.mark.slow
    def test_prefix_solution_has_static_law(self):
        """Midway through a stream the solution follows the static algorithm."""
        instance = gen_random(5, seed=18)
        order = [3, 1, 5, 2, 4]
        k = 3
        trials = 3000
        midway = [
            stream_simulate(
                instance, 0.5, rng=seed, order=order, family="stable"
            ).solutions[k - 1]
            for seed in range(trials)
        ]
        prefix = instance.restrict(order[:k])
        rng = np.random.default_rng(19)
        spec = get_algorithm("stable")
        static = [spec.run(prefix, 0.5, RandomDraws(rng)) for _ in range(trials)]
        support = sorted(set(midway) | set(static), key=lambda s: s.sorted_ids())
        if len(support) > 1:
            table = np.array(
                [[midway.count(s) for s in support], [static.count(s) for s in support]]
            )
            assert stats.chi2_contingency(table).pvalue > 1e-3

    @pytest.mark.slow
    def test_recourse_matches_prefix_sensitivity(self):
        """Mean recourse is the prefix-averaged sensitivity of the static algorithm.

        The budget W is shared across all steps of a modified-greedy stream, so
        each step's change is the deletion distance of the current prefix.
        """
        eps = 0.5
        instance = gen_random(5, seed=20)
        reports = simulate_streams(
            instance, eps, 2000, rng=11, family="modified-greedy"
        )
        recourse = np.array([report.amortized_recourse for report in reports])
        stderr = recourse.std(ddof=1) / np.sqrt(len(recourse))

        grid = 1 - eps + eps * (np.arange(200) + 0.5) / 200
        per_budget = []
        for W in grid:
            total = 0.0
            for size in range(1, instance.n + 1):
                distances = []
                for subset in itertools.combinations(instance.ids, size):
                    full = greedy_prefix(instance.restrict(subset), W)
                    for item_id in subset:
                        rest = [i for i in subset if i != item_id]
                        smaller = (
                            greedy_prefix(instance.restrict(rest), W) if rest else EMPTY
                        )
                        distances.append(full.hamming(smaller))
                total += float(np.mean(distances))
            per_budget.append(total / instance.n)
        expected = float(np.mean(per_budget))

        assert recourse.mean() <= expected + 4 * stderr + 0.02
        assert recourse.mean() >= expected - 4 * stderr - 0.02

    @pytest.mark.slow
    def test_recourse_at_scale(self):
        """Twenty streams over 100 random items stay within the recourse bound."""
        eps = 0.25
        instance = gen_random(100, seed=21)
        reports = simulate_streams(instance, eps, 20, rng=12, threads=4)
        recourse = np.array([report.amortized_recourse for report in reports])
        ci = recourse.std(ddof=1) / np.sqrt(len(recourse))
        bound = theoretical_bound("stable", eps)
        assert bound is not None
        assert recourse.mean() <= bound + 3 * ci
        assert all(report.family == DEFAULT_FAMILY for report in reports)
