"""Labeled-chain core: validation, stationary state, entropy closed forms."""

import itertools
import math

import numpy as np
import pytest

from qssp import (
    BlockTooLarge,
    LabeledHMC,
    NegativeEntry,
    NonStochasticRow,
    NotUnifilar,
    ReducibleChain,
    UnknownSymbol,
    block_entropy,
    entropy_rate_unifilar,
    minimize_unifilar,
    sample_sequence,
    state_entropy,
    stationary_distribution,
    unifilarity,
    validate,
    word_probability,
)

from conftest import (
    oracle_block_entropy,
    oracle_stationary,
    oracle_word_probability,
    random_hmc,
    random_unifilar_hmc,
)


def golden_mean() -> LabeledHMC:
    return LabeledHMC(
        ("A", "B"),
        ("1", "0"),
        {"1": np.array([[0.5, 0.0], [1.0, 0.0]]),
         "0": np.array([[0.0, 0.5], [0.0, 0.0]])},
    )


def flip_flop() -> LabeledHMC:
    """Period-2 chain with a single symbol; constant output."""
    return LabeledHMC(("P", "Q"), ("a",),
                      {"a": np.array([[0.0, 1.0], [1.0, 0.0]])})


class TestValidation:
    def test_valid_machine(self):
        assert validate(golden_mean()).ok

    def test_non_stochastic_row(self):
        m = LabeledHMC(("A",), ("a",), {"a": np.array([[0.9]])})
        res = validate(m)
        assert not res.ok
        with pytest.raises(NonStochasticRow):
            res.raise_if_invalid()

    def test_negative_entry(self):
        m = LabeledHMC(("A", "B"), ("a",),
                       {"a": np.array([[1.1, -0.1], [1.0, 0.0]])})
        with pytest.raises(NegativeEntry):
            validate(m).raise_if_invalid()

    def test_reducible_chain(self):
        m = LabeledHMC(("A", "B"), ("a",),
                       {"a": np.array([[1.0, 0.0], [0.5, 0.5]])})
        with pytest.raises(ReducibleChain):
            validate(m).raise_if_invalid()

    def test_error_payload_is_serializable(self):
        m = LabeledHMC(("A",), ("a",), {"a": np.array([[0.9]])})
        err = validate(m).error
        d = err.to_dict()
        assert d["type"] == "NonStochasticRow"
        assert "message" in d


class TestStationary:
    def test_golden_mean_exact(self):
        pi = stationary_distribution(golden_mean())
        np.testing.assert_allclose(pi, [2 / 3, 1 / 3], atol=1e-12)

    def test_periodic_chain(self):
        # Power iteration without the lazy step oscillates here.
        pi = stationary_distribution(flip_flop())
        np.testing.assert_allclose(pi, [0.5, 0.5], atol=1e-12)

    def test_matches_eigenvector_oracle(self, rng):
        for _ in range(20):
            m = random_hmc(rng)
            pi = stationary_distribution(m)
            np.testing.assert_allclose(pi, oracle_stationary(m), atol=1e-9)
            assert pi.min() >= 0.0
            assert abs(pi.sum() - 1.0) < 1e-12

    def test_invariance(self, rng):
        for _ in range(10):
            m = random_hmc(rng)
            pi = stationary_distribution(m)
            np.testing.assert_allclose(pi @ m.transition_matrix, pi, atol=1e-10)


class TestUnifilarity:
    def test_golden_mean_unifilar(self):
        assert unifilarity(golden_mean()).unifilar

    def test_nonunifilar_witnesses(self):
        m = LabeledHMC(("A", "B"), ("a",),
                       {"a": np.array([[0.5, 0.5], [1.0, 0.0]])})
        rep = unifilarity(m)
        assert not rep.unifilar
        (state, symbol, succs) = rep.witnesses[0]
        assert state == "A" and symbol == "a"
        assert set(succs) == {"A", "B"}

    def test_random_unifilar_generator_is_unifilar(self, rng):
        for _ in range(20):
            assert unifilarity(random_unifilar_hmc(rng)).unifilar


class TestWordProbability:
    def test_against_path_sum_oracle(self, rng):
        for _ in range(5):
            m = random_hmc(rng, n_states=3, n_symbols=2)
            for word in itertools.product(m.alphabet, repeat=3):
                assert word_probability(m, word) == pytest.approx(
                    oracle_word_probability(m, word), abs=1e-12)

    def test_prefix_additivity(self, rng):
        for _ in range(10):
            m = random_hmc(rng)
            word = sample_sequence(m, 4, seed=1)
            total = sum(word_probability(m, word + [x]) for x in m.alphabet)
            assert total == pytest.approx(word_probability(m, word), abs=1e-12)

    def test_empty_word(self):
        assert word_probability(golden_mean(), []) == pytest.approx(1.0)

    def test_forbidden_word(self):
        assert word_probability(golden_mean(), ["0", "0"]) == 0.0

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbol):
            word_probability(golden_mean(), ["z"])


class TestSampleSequence:
    def test_deterministic(self):
        m = golden_mean()
        assert sample_sequence(m, 500, seed=42) == sample_sequence(m, 500, seed=42)
        assert sample_sequence(m, 500, seed=42) != sample_sequence(m, 500, seed=43)

    def test_symbols_from_alphabet(self):
        m = golden_mean()
        assert set(sample_sequence(m, 200, seed=0)) <= set(m.alphabet)

    def test_no_forbidden_subwords(self):
        seq = "".join(sample_sequence(golden_mean(), 5000, seed=3))
        assert "00" not in seq

    def test_empirical_frequency(self):
        seq = sample_sequence(golden_mean(), 20000, seed=5)
        freq = seq.count("0") / len(seq)
        assert freq == pytest.approx(1 / 3, abs=0.02)

    def test_zero_length(self):
        assert sample_sequence(golden_mean(), 0, seed=0) == []


class TestEntropyRate:
    def test_golden_mean_closed_form(self):
        assert entropy_rate_unifilar(golden_mean()) == pytest.approx(
            2 / 3, abs=1e-12)

    def test_equals_block_entropy_difference(self):
        m = golden_mean()
        # One symbol synchronizes this machine, so the conditional block
        # entropy is exact from length two on.
        assert block_entropy(m, 2) - block_entropy(m, 1) == pytest.approx(
            2 / 3, abs=1e-10)

    def test_block_difference_on_random_unifilar(self, rng):
        for _ in range(5):
            m = random_unifilar_hmc(rng, n_states=3, n_symbols=2)
            h = entropy_rate_unifilar(m)
            diffs = [block_entropy(m, length) - block_entropy(m, length - 1)
                     for length in (8, 10, 12)]
            # The conditional entropy decreases to the rate from above.
            for diff in diffs:
                assert diff >= h - 1e-9
            assert diffs[2] <= diffs[0] + 1e-12
            assert diffs[2] == pytest.approx(h, abs=0.06)

    def test_nonunifilar_raises(self):
        m = LabeledHMC(("A", "B"), ("a",),
                       {"a": np.array([[0.5, 0.5], [1.0, 0.0]])})
        with pytest.raises(NotUnifilar):
            entropy_rate_unifilar(m)
        # The same formula evaluated anyway is an upper bound (here the
        # process is constant, so the true rate is 0).
        assert entropy_rate_unifilar(m, allow_nonunifilar=True) == pytest.approx(
            2 / 3, abs=1e-12)

    def test_deterministic_machine_rate_zero(self):
        assert entropy_rate_unifilar(flip_flop()) == pytest.approx(0.0, abs=1e-12)


class TestStateEntropy:
    def test_golden_mean(self):
        expect = -(2 / 3) * math.log2(2 / 3) - (1 / 3) * math.log2(1 / 3)
        assert state_entropy(golden_mean()) == pytest.approx(expect, abs=1e-12)

    def test_uniform(self):
        assert state_entropy(flip_flop()) == pytest.approx(1.0, abs=1e-12)


class TestBlockEntropy:
    def test_zero_length(self):
        assert block_entropy(golden_mean(), 0) == 0.0

    def test_single_symbol(self):
        expect = -(2 / 3) * math.log2(2 / 3) - (1 / 3) * math.log2(1 / 3)
        assert block_entropy(golden_mean(), 1) == pytest.approx(expect, abs=1e-12)

    def test_against_enumeration_oracle(self, rng):
        for _ in range(3):
            m = random_hmc(rng, n_states=3, n_symbols=2)
            for length in (1, 2, 3):
                assert block_entropy(m, length) == pytest.approx(
                    oracle_block_entropy(m, length), abs=1e-9)

    def test_monotone_and_subadditive(self, rng):
        m = random_unifilar_hmc(rng)
        hs = [block_entropy(m, n) for n in range(5)]
        diffs = np.diff(hs)
        assert (diffs >= -1e-12).all()
        # Conditional entropies decrease with block length.
        assert (np.diff(diffs) <= 1e-9).all()

    def test_guard(self):
        with pytest.raises(BlockTooLarge):
            block_entropy(golden_mean(), 100)


class TestMinimizeUnifilar:
    def test_already_minimal(self):
        m = golden_mean()
        mm = minimize_unifilar(m)
        assert mm.n_states == 2
        assert entropy_rate_unifilar(mm) == pytest.approx(2 / 3, abs=1e-12)

    def test_merges_equivalent_states(self):
        mm = minimize_unifilar(flip_flop())
        assert mm.n_states == 1

    def test_split_state_presentation(self):
        # A golden-mean process presented with its high-frequency state
        # duplicated; both copies predict the same futures.
        m = LabeledHMC(
            ("A1", "A2", "B"),
            ("1", "0"),
            {"1": np.array([[0.0, 0.5, 0.0],
                            [0.5, 0.0, 0.0],
                            [1.0, 0.0, 0.0]]),
             "0": np.array([[0.0, 0.0, 0.5],
                            [0.0, 0.0, 0.5],
                            [0.0, 0.0, 0.0]])},
        )
        assert unifilarity(m).unifilar
        mm = minimize_unifilar(m)
        assert mm.n_states == 2
        assert entropy_rate_unifilar(mm) == pytest.approx(2 / 3, abs=1e-10)
        for word in itertools.product(("1", "0"), repeat=4):
            assert word_probability(mm, word) == pytest.approx(
                word_probability(m, word), abs=1e-10)

    def test_nonunifilar_rejected(self):
        m = LabeledHMC(("A", "B"), ("a",),
                       {"a": np.array([[0.5, 0.5], [1.0, 0.0]])})
        with pytest.raises(NotUnifilar):
            minimize_unifilar(m)
