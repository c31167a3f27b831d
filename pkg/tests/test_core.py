"""Domain model: normalization, attention weights, DCG, and the ledger."""

import itertools
import math

import numpy as np
import pytest

from fairrank.core import (
    Assignment,
    AttentionModel,
    Dataset,
    Ledger,
    QueryEvent,
    attention_weights,
    dcg_at_k,
    ideal_ranking,
    ledger_update,
    ndcg_at_k,
    normalize_relevance,
)
from fairrank.errors import (
    AllZeroError,
    CoverageError,
    LengthMismatchError,
    NegativeScoreError,
    ValidationError,
)


class TestNormalizeRelevance:
    def test_symmetric(self):
        assert normalize_relevance({"a": 2.0, "b": 2.0}) == {"a": 0.5, "b": 0.5}

    def test_proportional(self):
        assert normalize_relevance({"a": 1.0, "b": 3.0}) == {"a": 0.25, "b": 0.75}

    def test_all_zero(self):
        with pytest.raises(AllZeroError):
            normalize_relevance({"a": 0.0, "b": 0.0})

    def test_negative(self):
        with pytest.raises(NegativeScoreError):
            normalize_relevance({"a": 1.0, "b": -0.1})


class TestAttentionWeights:
    def test_three_positions(self):
        # normalization constant evaluated directly
        z = 1.0 + 1.0 / math.log2(3) + 0.5
        expected = np.array([1.0, 1.0 / math.log2(3), 0.5]) / z
        np.testing.assert_allclose(attention_weights(3, 3), expected, atol=1e-15)
        np.testing.assert_allclose(
            attention_weights(3, 3), [0.46928, 0.29608, 0.23464], atol=1e-5
        )

    def test_single_position(self):
        np.testing.assert_array_equal(attention_weights(1, 10), [1.0])

    def test_zero_beyond_cutoff(self):
        w = attention_weights(12, 10)
        assert w[10] == 0.0 and w[11] == 0.0
        assert w[9] > 0.0

    @pytest.mark.parametrize("n", [1, 2, 3, 7, 10, 47, 200, 1000])
    @pytest.mark.parametrize("cutoff", [1, 3, 10, 50])
    def test_simplex_and_monotone(self, n, cutoff):
        w = attention_weights(n, cutoff)
        assert abs(w.sum() - 1.0) <= 1e-12
        assert np.all(np.diff(w) <= 0)
        assert np.all(w >= 0)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            attention_weights(0, 10)
        with pytest.raises(ValidationError):
            attention_weights(5, 0)


class TestDcg:
    REL = {"a": 1.0, "b": 0.0}

    def test_top_slot(self):
        assert dcg_at_k(["a", "b"], self.REL, 2) == 1.0

    def test_second_slot(self):
        assert dcg_at_k(["b", "a"], self.REL, 2) == pytest.approx(
            1.0 / math.log2(3), abs=1e-12
        )

    def test_all_zero_relevance(self):
        assert dcg_at_k(["a", "b"], {"a": 0.0, "b": 0.0}, 2) == 0.0

    def test_ndcg_identity(self):
        assert ndcg_at_k(["a", "b"], ["a", "b"], self.REL, 2) == 1.0

    def test_ndcg_swap(self):
        assert ndcg_at_k(["b", "a"], ["a", "b"], self.REL, 2) == pytest.approx(
            0.63093, abs=1e-5
        )

    def test_ndcg_zero_ideal_is_vacuously_perfect(self):
        assert ndcg_at_k(["a", "b"], ["a", "b"], {"a": 0.0, "b": 0.0}, 2) == 1.0

    def test_ideal_ordering_maximizes_dcg(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            n = int(rng.integers(2, 8))
            ids = [f"i{j}" for j in range(n)]
            rel = dict(zip(ids, rng.random(n).tolist()))
            query = QueryEvent("q", 1, (1.0,), normalize_relevance(rel))
            ideal = ideal_ranking(query)
            k = int(rng.integers(1, n + 1))
            best = dcg_at_k(ideal, query.relevance, k)
            for perm in itertools.permutations(ids):
                assert dcg_at_k(perm, query.relevance, k) <= best + 1e-12


class TestIdealRanking:
    def test_descending(self):
        q = QueryEvent("q", 1, (1.0,), {"a": 0.7, "b": 0.3})
        assert ideal_ranking(q) == ("a", "b")

    def test_tie_break_by_identifier(self):
        q = QueryEvent("q", 1, (1.0,), {"b": 0.5, "a": 0.5})
        assert ideal_ranking(q) == ("a", "b")

    def test_three_way(self):
        q = QueryEvent("q", 1, (1.0,), {"a": 0.2, "b": 0.3, "c": 0.5})
        assert ideal_ranking(q) == ("c", "b", "a")


class TestValidation:
    def test_query_must_be_normalized(self):
        with pytest.raises(ValidationError):
            QueryEvent("q", 1, (1.0,), {"a": 0.7, "b": 0.7})

    def test_query_rejects_negative_relevance(self):
        with pytest.raises(ValidationError):
            QueryEvent("q", 1, (1.0,), {"a": 1.2, "b": -0.2})

    def test_query_coverage(self):
        q = QueryEvent("q", 1, (1.0,), {"a": 0.5, "b": 0.5})
        with pytest.raises(CoverageError):
            q.validate_coverage(("a", "b", "c"))

    def test_dataset_group_map_exact(self):
        with pytest.raises(ValidationError):
            Dataset(("a", "b"), {"a": "g"})
        with pytest.raises(ValidationError):
            Dataset(("a", "a"), {"a": "g"})

    def test_assignment_rejects_duplicates(self):
        with pytest.raises(ValidationError):
            Assignment(("a", "a"))


def _simple_ledger(cutoff=3):
    dataset = Dataset.single_group(("a", "b", "c"))
    return dataset, Ledger(dataset, 1), AttentionModel(cutoff)


W1 = float(attention_weights(3, 3)[0])


class TestLedgerUpdate:
    def test_positive_polarity_top_slot(self):
        dataset, ledger, attention = _simple_ledger()
        q = QueryEvent("q", 1, (1.0,), {"a": 0.2, "b": 0.3, "c": 0.5})
        ledger_update(ledger, q, Assignment(("a", "b", "c")), attention)
        mean, var = ledger.moments("a", "attention", "aware")
        assert mean[0] == pytest.approx(W1, abs=1e-12)
        assert mean[0] == pytest.approx(0.46928, abs=1e-5)

    def test_negative_polarity_flips_mean_not_variance(self):
        dataset, ledger, attention = _simple_ledger()
        q = QueryEvent("q", 1, (-1.0,), {"a": 0.2, "b": 0.3, "c": 0.5})
        ledger.update(q, Assignment(("a", "b", "c")), attention)
        mean, var = ledger.moments("a", "attention", "aware")
        assert mean[0] == pytest.approx(-W1, abs=1e-12)
        assert var[0] == pytest.approx(W1 * (1.0 - W1), abs=1e-15)
        assert var[0] == pytest.approx(0.24906, abs=1e-5)

    def test_zero_polarity_freezes_aware_track_only(self):
        dataset, ledger, attention = _simple_ledger()
        q = QueryEvent("q", 1, (0.0,), {"a": 0.2, "b": 0.3, "c": 0.5})
        ledger.update(q, Assignment(("a", "b", "c")), attention)
        for channel in ("attention", "relevance"):
            mean, var = ledger.moments("a", channel, "aware")
            assert mean[0] == 0.0 and var[0] == 0.0
        mean, _ = ledger.moments("a", "attention", "agnostic")
        assert mean[0] == pytest.approx(W1, abs=1e-12)

    def test_polarity_arity_mismatch(self):
        dataset, ledger, attention = _simple_ledger()
        q = QueryEvent("q", 1, (1.0, -1.0), {"a": 0.2, "b": 0.3, "c": 0.5})
        with pytest.raises(LengthMismatchError):
            ledger.update(q, Assignment(("a", "b", "c")), attention)

    def test_assignment_must_cover_dataset(self):
        dataset, ledger, attention = _simple_ledger()
        q = QueryEvent("q", 1, (1.0,), {"a": 0.2, "b": 0.3, "c": 0.5})
        with pytest.raises(ValidationError):
            ledger.update(q, Assignment(("a", "b")), attention)


class TestLedgerAccounting:
    def test_mean_matches_independent_recomputation(self):
        """Cumulative means re-derived with plain Python bookkeeping."""
        rng = np.random.default_rng(7)
        ids = tuple(f"i{j}" for j in range(6))
        dataset = Dataset.single_group(ids)
        attention = AttentionModel(3)
        ledger = Ledger(dataset, 1)
        weights = attention.weights(6)
        expect_attn = {i: 0.0 for i in ids}
        expect_rel = {i: 0.0 for i in ids}
        for t in range(1, 9):
            rel = rng.dirichlet(np.ones(6))
            eta = float(rng.choice([-1.0, 1.0]))
            q = QueryEvent(f"q{t}", t, (eta,), dict(zip(ids, rel.tolist())))
            order = tuple(ids[k] for k in rng.permutation(6))
            ledger.update(q, Assignment(order), attention)
            for pos, ind in enumerate(order, start=1):
                expect_attn[ind] += eta * weights[pos - 1]
            for ind, r in q.relevance.items():
                expect_rel[ind] += eta * r
        for ind in ids:
            mean_a, _ = ledger.moments(ind, "attention", "aware")
            mean_r, _ = ledger.moments(ind, "relevance", "aware")
            assert mean_a[0] == pytest.approx(expect_attn[ind], abs=1e-12)
            assert mean_r[0] == pytest.approx(expect_rel[ind], abs=1e-12)

    def test_agnostic_mean_is_sum_of_position_weights(self):
        rng = np.random.default_rng(8)
        ids = tuple(f"i{j}" for j in range(5))
        dataset = Dataset.single_group(ids)
        attention = AttentionModel(2)
        ledger = Ledger(dataset, 1)
        weights = attention.weights(5)
        expect = {i: 0.0 for i in ids}
        for t in range(1, 7):
            rel = rng.dirichlet(np.ones(5))
            q = QueryEvent(f"q{t}", t, (float(rng.uniform(-1, 1)),),
                           dict(zip(ids, rel.tolist())))
            order = tuple(ids[k] for k in rng.permutation(5))
            ledger.update(q, Assignment(order), attention)
            for pos, ind in enumerate(order, start=1):
                expect[ind] += weights[pos - 1]
        for ind in ids:
            mean, _ = ledger.moments(ind, "attention", "agnostic")
            assert mean[0] == pytest.approx(expect[ind], abs=1e-12)

    def test_unit_polarity_tracks_are_bitwise_equal(self):
        rng = np.random.default_rng(11)
        ids = tuple(f"i{j}" for j in range(5))
        dataset = Dataset.single_group(ids)
        attention = AttentionModel(2)
        ledger = Ledger(dataset, 2)
        for t in range(1, 6):
            rel = rng.dirichlet(np.ones(5))
            q = QueryEvent(f"q{t}", t, (1.0, 1.0), dict(zip(ids, rel.tolist())))
            order = tuple(ids[k] for k in rng.permutation(5))
            ledger.update(q, Assignment(order), attention)
        for channel in ("attention", "relevance"):
            np.testing.assert_array_equal(
                ledger.mean_matrix(channel, "aware"), ledger.mean_matrix(channel, "agnostic")
            )
            np.testing.assert_array_equal(
                ledger.var_matrix(channel, "aware"), ledger.var_matrix(channel, "agnostic")
            )
            np.testing.assert_array_equal(
                ledger.sequences(channel, "aware"), ledger.sequences(channel, "agnostic")
            )

    def test_sequence_lengths_track_processed_queries(self):
        dataset, ledger, attention = _simple_ledger()
        for t in range(1, 4):
            q = QueryEvent(f"q{t}", t, (1.0,), {"a": 0.2, "b": 0.3, "c": 0.5})
            ledger.update(q, Assignment(("a", "b", "c")), attention)
            assert ledger.sequence("b", "attention").shape == (t, 1)
            assert ledger.t == t

    def test_variance_non_negative(self):
        rng = np.random.default_rng(3)
        ids = tuple(f"i{j}" for j in range(4))
        dataset = Dataset.single_group(ids)
        ledger = Ledger(dataset, 1)
        attention = AttentionModel(4)
        for t in range(1, 7):
            rel = rng.dirichlet(np.ones(4))
            eta = float(rng.uniform(-1, 1))
            q = QueryEvent(f"q{t}", t, (eta,), dict(zip(ids, rel.tolist())))
            ledger.update(q, Assignment(ids), attention)
        assert np.all(ledger.var_matrix("attention", "aware") >= 0)
        assert np.all(ledger.var_matrix("relevance", "aware") >= 0)

    def test_sequence_std_is_population_std_of_per_query_values(self):
        dataset, ledger, attention = _simple_ledger(cutoff=1)
        for t, rel_a in enumerate((0.5, 0.3), start=1):
            q = QueryEvent(
                f"q{t}", t, (1.0,), {"a": rel_a, "b": 0.2, "c": 0.8 - rel_a}
            )
            ledger.update(q, Assignment(("a", "b", "c")), attention)
        # a's attention values are [1, 1] -> std 0; relevance [0.5, 0.3] -> std 0.1
        assert ledger.sequence_std("a", "attention")[0] == 0.0
        assert ledger.sequence_std("a", "relevance")[0] == pytest.approx(0.1, abs=1e-12)
