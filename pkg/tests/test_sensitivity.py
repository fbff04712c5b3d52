"""Tests for exact and coupled average sensitivity measurement."""

import json

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from src.algorithms import get_algorithm
from src.core.draws import RandomDraws
from src.core.errors import DomainError
from src.core.model import EMPTY, Instance, Item
from src.instances.generators import (
    gen_lowerbound,
    gen_prop2,
    gen_random,
    lower_bound_sensitivity,
)
from src.lab.sensitivity import (
    DeletionEstimate,
    SensitivityReport,
    coupled_run,
    deterministic_sensitivity,
    mc_sensitivity_upper,
    theoretical_bound,
)

EMPTY_INSTANCE = Instance.from_arrays([], [])


class TestDeterministicSensitivity:
    """Exact measurement for deterministic algorithms."""

    @pytest.mark.parametrize("k", [2, 4, 10, 50])
    def test_plain_greedy_on_prop2(self, k):
        """Plain greedy moves (k + 1) / 2 memberships on average."""
        report = deterministic_sensitivity("greedy", gen_prop2(k))
        assert report.average == pytest.approx((k + 1) / 2)
        assert report.method == "exact"
        assert report.trials == 1

    def test_constant_algorithm(self, tiny_instance):
        """An algorithm that ignores its input has sensitivity zero."""
        report = deterministic_sensitivity(lambda instance: EMPTY, tiny_instance)
        assert report.average == 0.0
        assert set(report.per_deletion) == set(tiny_instance.ids)

    @pytest.mark.parametrize("k", [3, 4, 8])
    def test_optimum_on_lower_bound_instance(self, k):
        """The exact optimum swaps V1 for V2 whenever a V1 item goes."""
        report = deterministic_sensitivity("brute-force", gen_lowerbound(k=k))
        assert report.average == pytest.approx(k)
        assert report.average >= lower_bound_sensitivity(k)

    def test_rejects_randomized_and_empty(self, tiny_instance):
        """Randomized algorithms and empty instances are domain errors."""
        with pytest.raises(DomainError):
            deterministic_sensitivity("stable", tiny_instance)
        with pytest.raises(DomainError):
            deterministic_sensitivity("greedy", EMPTY_INSTANCE)


class TestCoupledRun:
    """One coupled pair of runs."""

    @pytest.mark.parametrize("family", ["stable", "modified-greedy"])
    def test_irrelevant_item(self, tiny_instance, family):
        """A zero-value item that is never chosen leaves the output unchanged."""
        instance = tiny_instance.with_item(Item(6, 0.0, 0.9))
        for seed in range(30):
            full, reduced = coupled_run(family, instance, 6, shared_seed=seed)
            assert full == reduced

    def test_unknown_item(self, tiny_instance):
        """Deleting an absent id is a domain error."""
        with pytest.raises(DomainError):
            coupled_run("stable", tiny_instance, 99, shared_seed=0)

    @pytest.mark.slow
    def test_reduced_marginal_matches_independent_runs(self):
        """Coupled outputs on V - i follow the independent-run distribution."""
        instance = gen_random(6, seed=77)
        smaller = instance.without(3)
        spec = get_algorithm("stable")
        trials = 10000
        coupled = [
            coupled_run("stable", instance, 3, shared_seed=seed)[1]
            for seed in range(trials)
        ]
        rng = np.random.default_rng(1)
        independent = [
            spec.run(smaller, 0.5, RandomDraws(rng)) for _ in range(trials)
        ]
        support = sorted(set(coupled) | set(independent))
        table = np.array(
            [
                [coupled.count(solution) for solution in support],
                [independent.count(solution) for solution in support],
            ]
        )
        if len(support) > 1:
            assert stats.chi2_contingency(table).pvalue > 1e-3


class TestMonteCarlo:
    """Coupled Monte Carlo upper bound."""

    def test_deterministic_family_is_exact(self):
        """A deterministic family reproduces the exact measurement."""
        instance = gen_prop2(6)
        exact = deterministic_sensitivity("greedy", instance)
        coupled = mc_sensitivity_upper("greedy", instance, 0.5, trials=50, rng=0)
        assert coupled.per_deletion == exact.per_deletion
        assert coupled.ci_halfwidth == 0.0
        assert coupled.method == "coupled_mc"

    def test_modified_greedy_on_prop2(self):
        """Modified greedy stays within 1 / eps + 1."""
        eps = 0.2
        report = mc_sensitivity_upper(
            "modified-greedy", gen_prop2(5), eps, trials=2000, rng=3
        )
        assert report.bound == pytest.approx(1 / eps + 1)
        assert report.average <= report.bound + 3 * report.ci_halfwidth

    def test_stable_within_bound(self):
        """The general algorithm stays below its proven bound."""
        report = mc_sensitivity_upper(
            "stable", gen_random(6, seed=4), 0.25, trials=100, rng=5
        )
        assert 0.0 <= report.average <= report.bound + 3 * report.ci_halfwidth
        assert all(entry.estimate >= 0 for entry in report.per_deletion.values())

    def test_thread_count_does_not_matter(self):
        """Per-deletion generators make the result independent of threads."""
        instance = gen_random(6, seed=6)
        one = mc_sensitivity_upper("modified-greedy", instance, 0.3, trials=200, rng=9)
        four = mc_sensitivity_upper(
            "modified-greedy", instance, 0.3, trials=200, rng=9, threads=4
        )
        assert one.per_deletion == four.per_deletion

    def test_rejects_bad_input(self, tiny_instance):
        """No items or no trials are domain errors."""
        with pytest.raises(DomainError):
            mc_sensitivity_upper("stable", EMPTY_INSTANCE, 0.5, trials=10)
        with pytest.raises(DomainError):
            mc_sensitivity_upper("stable", tiny_instance, 0.5, trials=0)


class TestReport:
    """Report model and bounds."""

    def test_average_must_match(self):
        """An average that disagrees with the entries is rejected."""
        with pytest.raises(ValidationError):
            SensitivityReport(
                algorithm="greedy",
                method="exact",
                trials=1,
                per_deletion={1: DeletionEstimate(estimate=1.0)},
                average=2.0,
            )

    def test_from_estimates(self):
        """Entries are sorted by id and averaged."""
        report = SensitivityReport.from_estimates(
            {2: DeletionEstimate(estimate=3.0), 1: DeletionEstimate(estimate=1.0)},
            algorithm="greedy",
            method="exact",
            trials=1,
        )
        assert list(report.per_deletion) == [1, 2]
        assert report.average == 2.0
        with pytest.raises(DomainError):
            SensitivityReport.from_estimates(
                {}, algorithm="greedy", method="exact", trials=1
            )

    def test_frame_and_json(self):
        """Tabular and JSON views carry the same numbers."""
        report = deterministic_sensitivity("greedy", gen_prop2(4))
        frame = report.to_frame()
        assert list(frame.columns) == ["id", "estimate", "ci", "trials"]
        assert frame["estimate"].mean() == pytest.approx(report.average)
        payload = json.loads(report.model_dump_json())
        assert payload["schema_version"] == 1
        assert payload["average"] == pytest.approx(2.5)

    def test_theoretical_bounds(self):
        """Closed-form bounds per family."""
        assert theoretical_bound("modified-greedy", 0.25) == pytest.approx(5.0)
        assert theoretical_bound("simple", 0.25) == pytest.approx(6.0)
        assert theoretical_bound("greedy", 0.25) is None
        stable = theoretical_bound("stable", 0.6)
        assert stable == pytest.approx(12 / 0.05 * np.log(1 / 0.05))
        assert theoretical_bound("fpras", 0.6) > stable
