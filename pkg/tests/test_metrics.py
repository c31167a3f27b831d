"""Unfairness metrics: worst-case, sum-based, group-level, and sentinels."""

import math

import numpy as np
import pytest

from fairrank.core import Assignment, AttentionModel, Dataset, Ledger, QueryEvent
from fairrank.divergence import DivergenceKind
from fairrank.errors import EmptyScopeError
from fairrank.metrics import (
    build_report,
    dp,
    eur,
    fairwashing_delta,
    group_divergences,
    group_summaries,
    group_unfairness,
    iaa,
    individual_divergences,
    individual_unfairness,
    metrics_panel,
    relative_improvement,
)
from fairrank.synth import fairwashing_scenario, gen_random_instance
from fairrank.verify import random_ledger

KINDS = (DivergenceKind.L1, DivergenceKind.L2VAR, DivergenceKind.W1)


def winner_takes_all_ledger(relevances, orders, groups=None):
    """Attention model [1, 0, ...]: position 1 gets everything."""
    ids = tuple(sorted(relevances[0]))
    if groups is None:
        dataset = Dataset.single_group(ids)
    else:
        dataset = Dataset(ids, groups)
    ledger = Ledger(dataset, 1)
    attention = AttentionModel(1)
    for t, (rel, order) in enumerate(zip(relevances, orders), start=1):
        ledger.update(QueryEvent(f"q{t}", t, (1.0,), rel), Assignment(order), attention)
    return ledger, dataset


class TestIndividualUnfairness:
    def test_max_of_divergences(self):
        # gaps: a |1 - .5| = .5, b .3, c .2
        ledger, _ = winner_takes_all_ledger(
            [{"a": 0.5, "b": 0.3, "c": 0.2}], [("a", "b", "c")]
        )
        values = individual_divergences(ledger, DivergenceKind.L1)
        assert values == pytest.approx({"a": 0.5, "b": 0.3, "c": 0.2})
        assert individual_unfairness(ledger, DivergenceKind.L1) == pytest.approx(0.5)
        assert iaa(ledger) == pytest.approx(1.0)

    def test_calibrated_stream_is_fair_under_every_kind(self):
        ids = ("a", "b", "c")
        dataset = Dataset.single_group(ids)
        attention = AttentionModel(3)
        w = attention.weights(3)
        ledger = Ledger(dataset, 1)
        rel = dict(zip(ids, (float(w[0]), float(w[1]), float(w[2]))))
        for t in range(1, 4):
            ledger.update(QueryEvent(f"q{t}", t, (1.0,), rel), Assignment(ids), attention)
        for kind in KINDS:
            assert individual_unfairness(ledger, kind) == 0.0
            assert group_unfairness(ledger, kind) == 0.0
        assert iaa(ledger) == 0.0

    def test_scope_restricts_the_max(self):
        ledger, _ = winner_takes_all_ledger(
            [{"a": 0.5, "b": 0.3, "c": 0.2}], [("a", "b", "c")]
        )
        assert individual_unfairness(
            ledger, DivergenceKind.L1, scope=("b", "c")
        ) == pytest.approx(0.3)
        with pytest.raises(EmptyScopeError):
            individual_unfairness(ledger, DivergenceKind.L1, scope=())

    def test_empty_ledger_rejected(self):
        dataset = Dataset.single_group(("a",))
        with pytest.raises(EmptyScopeError):
            individual_unfairness(Ledger(dataset, 1), DivergenceKind.L1)

    def test_iaa_dominates_worst_case_l1(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            _, ledger = random_ledger(rng)
            for mode in ("aware", "agnostic"):
                assert iaa(ledger, mode) >= individual_unfairness(
                    ledger, DivergenceKind.L1, mode
                ) - 1e-12


class TestGroupUnfairness:
    def test_singleton_groups_reduce_to_individuals(self):
        groups = {"a": "ga", "b": "gb", "c": "gc"}
        ledger, dataset = winner_takes_all_ledger(
            [{"a": 0.5, "b": 0.3, "c": 0.2}], [("a", "b", "c")], groups
        )
        for kind in KINDS:
            assert group_unfairness(ledger, kind) == pytest.approx(
                individual_unfairness(ledger, kind), abs=1e-15
            )

    def test_group_sequence_averages_members(self):
        # one group holding a and b: per-query group attention (0.4+0.2)/2
        ids = ("a", "b")
        dataset = Dataset(ids, {"a": "g", "b": "g"})
        ledger = Ledger(dataset, 1)
        attention = AttentionModel(2)
        w = attention.weights(2)  # [0.6131.., 0.3868..]
        ledger.update(
            QueryEvent("q", 1, (1.0,), {"a": 0.5, "b": 0.5}),
            Assignment(("a", "b")),
            attention,
        )
        summary = group_summaries(ledger)["g"]
        assert summary.seq_attn[0, 0] == pytest.approx((w[0] + w[1]) / 2, abs=1e-15)
        assert summary.mean_attn[0] == pytest.approx(0.5, abs=1e-15)
        # variance accrues at 1/|g|^2 of summed member variances
        expected_var = (w[0] * (1 - w[0]) + w[1] * (1 - w[1])) / 4
        assert summary.var_attn[0] == pytest.approx(expected_var, abs=1e-15)

    def test_group_never_exceeds_individual(self):
        rng = np.random.default_rng(37)
        for _ in range(60):
            dataset, ledger = random_ledger(rng)
            for kind in KINDS:
                for mode in ("aware", "agnostic"):
                    gu = group_unfairness(ledger, kind, mode, dataset)
                    iu = individual_unfairness(ledger, kind, mode)
                    assert gu <= iu + 1e-9


class TestBaselineMetrics:
    def test_eur_and_dp_two_groups(self):
        groups = {"a": "g1", "b": "g2"}
        ledger, dataset = winner_takes_all_ledger(
            [{"a": 0.5, "b": 0.5}], [("a", "b")], groups
        )
        # exposures: 1 and 0; relevances: 0.5 and 0.5 -> ratios 2 and 0
        assert eur(ledger, "agnostic", dataset) == pytest.approx(2.0)
        assert dp(ledger, "agnostic", dataset) == pytest.approx(1.0)

    def test_eur_zero_when_calibrated(self):
        groups = {"a": "g1", "b": "g2"}
        ids = ("a", "b")
        dataset = Dataset(ids, groups)
        attention = AttentionModel(2)
        w = attention.weights(2)
        ledger = Ledger(dataset, 1)
        rel = {"a": float(w[0]), "b": float(w[1])}
        ledger.update(QueryEvent("q", 1, (1.0,), rel), Assignment(ids), attention)
        assert eur(ledger, "agnostic", dataset) == pytest.approx(0.0, abs=1e-12)
        assert dp(ledger, "agnostic", dataset) == pytest.approx(
            float(w[0] - w[1]), abs=1e-12
        )

    def test_eur_three_groups_max_pairwise(self):
        groups = {"a": "g1", "b": "g2", "c": "g3"}
        ledger, dataset = winner_takes_all_ledger(
            [{"a": 0.5, "b": 0.3, "c": 0.2}], [("a", "b", "c")], groups
        )
        # ratios: 1/.5=2, 0, 0 -> max pairwise 2
        assert eur(ledger, "agnostic", dataset) == pytest.approx(2.0)

    def test_eur_undefined_on_zero_group_relevance(self):
        groups = {"a": "g1", "b": "g2"}
        ledger, dataset = winner_takes_all_ledger(
            [{"a": 1.0, "b": 0.0}], [("a", "b")], groups
        )
        assert math.isnan(eur(ledger, "agnostic", dataset))

    def test_dp_single_group_is_zero(self):
        ledger, dataset = winner_takes_all_ledger([{"a": 1.0}], [("a",)])
        assert dp(ledger, "agnostic", dataset) == 0.0


class TestSentinels:
    def test_fairwashing_positive(self):
        assert fairwashing_delta(1.0, 0.5) == pytest.approx(1.0)

    def test_fairwashing_negative(self):
        assert fairwashing_delta(0.5, 1.0) == pytest.approx(-0.5)

    def test_fairwashing_infinite(self):
        assert fairwashing_delta(1.0, 0.0) == math.inf

    def test_fairwashing_zero_over_zero(self):
        assert fairwashing_delta(0.0, 0.0) == 0.0

    def test_relative_improvement_table_value(self):
        assert relative_improvement(1.0, 0.175) == pytest.approx(0.825)

    def test_relative_improvement_no_change(self):
        assert relative_improvement(0.7, 0.7) == 0.0

    def test_relative_improvement_worsening_is_negative(self):
        assert relative_improvement(0.5, 0.6) < 0.0

    def test_relative_improvement_undefined_on_zero_pre(self):
        assert math.isnan(relative_improvement(0.0, 0.3))


class TestPolarityScenario:
    def test_flip_scenario_exact_values(self):
        dataset, stream, assignments, attention = fairwashing_scenario()
        ledger = Ledger(dataset, 1)
        for query, assignment in zip(stream, assignments):
            ledger.update(query, assignment, attention)
        assert individual_unfairness(ledger, DivergenceKind.L1, "agnostic") == 0.0
        assert individual_unfairness(ledger, DivergenceKind.L1, "aware") == 1.0
        assert iaa(ledger, "aware") == 2.0
        assert fairwashing_delta(
            individual_unfairness(ledger, DivergenceKind.L1, "aware"),
            individual_unfairness(ledger, DivergenceKind.L1, "agnostic"),
        ) == math.inf

    def test_unit_polarity_modes_agree_exactly(self):
        dataset, stream = gen_random_instance(8, 3, 5, "unit", seed=5)
        attention = AttentionModel(4)
        ledger = Ledger(dataset, 1)
        rng = np.random.default_rng(5)
        for q in stream:
            order = tuple(dataset.individuals[i] for i in rng.permutation(8))
            ledger.update(q, Assignment(order), attention)
        aware = metrics_panel(ledger, "aware", dataset)
        agnostic = metrics_panel(ledger, "agnostic", dataset)
        assert aware.to_dict() == agnostic.to_dict()


class TestReport:
    def test_report_structure_and_washing_panel(self):
        dataset, stream, assignments, attention = fairwashing_scenario()
        ledger = Ledger(dataset, 1)
        for query, assignment in zip(stream, assignments):
            ledger.update(query, assignment, attention)
        report = build_report(ledger, dataset)
        assert set(report.panels) == {"aware", "agnostic"}
        assert report.fairwashing["individual.L1"] == math.inf
        doc = report.to_dict()
        assert set(doc["metrics"]["aware"]["individual"]) == {"L1", "L2var", "W1"}

    def test_group_divergences_by_name(self):
        groups = {"a": "g1", "b": "g2"}
        ledger, dataset = winner_takes_all_ledger(
            [{"a": 0.5, "b": 0.5}], [("a", "b")], groups
        )
        values = group_divergences(ledger, DivergenceKind.L1, "agnostic", dataset)
        assert values == pytest.approx({"g1": 0.5, "g2": 0.5})
