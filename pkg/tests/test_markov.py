import numpy as np
import pytest

from mistakelab.markov import (
    DecisionVector,
    TransitionTable,
    bayes_predictor,
    extract_outcome,
    generate,
    half_split_source,
    predict,
    train,
)
from mistakelab.sequences import as_bits, random_bernoulli


def brute_force_counts(x, k):
    """Independent window-scan oracle for the training counts."""
    x = list(x)
    visits = [0] * 2**k
    ones = [0] * 2**k
    for t in range(k, len(x)):
        word = "".join(str(b) for b in x[t - k : t])
        state = int(word, 2)
        visits[state] += 1
        ones[state] += x[t]
    return visits, ones


def test_half_split_source_order1():
    assert half_split_source(1).emit_one.tolist() == [0.7, 0.3]


def test_half_split_source_order3():
    assert half_split_source(3).emit_one.tolist() == [0.7] * 4 + [0.3] * 4


def test_half_split_source_rejects_order_zero():
    with pytest.raises(ValueError):
        half_split_source(0)


def test_bayes_predictor_thresholds():
    assert bayes_predictor(half_split_source(3)).decisions.tolist() == [1] * 4 + [0] * 4
    ties = TransitionTable(order=2, emit_one=[0.5] * 4)
    assert bayes_predictor(ties).decisions.tolist() == [0, 0, 0, 0]
    assert bayes_predictor(half_split_source(1)).decisions.tolist() == [1, 0]


def test_generate_deterministic_all_ones_chain():
    table = TransitionTable(order=2, emit_one=[1.0] * 4)
    assert generate(table, 10, seed=1, init=0).tolist() == [1] * 10


def test_generate_deterministic_alternation():
    table = TransitionTable(order=1, emit_one=[1.0, 0.0])
    assert generate(table, 6, seed=1, init=0).tolist() == [1, 0, 1, 0, 1, 0]


def test_generate_empty_and_bad_init():
    table = half_split_source(2)
    assert generate(table, 0, seed=1, init=0).size == 0
    with pytest.raises(ValueError):
        generate(table, 5, seed=1, init=4)


def test_generate_stationary_ones_fraction():
    # Two-state chain with p(1|0)=0.7, p(1|1)=0.3: stationary share of ones
    # solves pi = pi*0.3 + (1-pi)*0.7, i.e. pi = 0.7/1.4 = 0.5.
    table = TransitionTable(order=1, emit_one=[0.7, 0.3])
    bits = generate(table, 100000, seed=21, init=0)
    assert abs(bits.mean() - 0.5) <= 0.01


def test_generate_is_reproducible():
    table = half_split_source(3)
    assert np.array_equal(
        generate(table, 500, seed=9, init=2), generate(table, 500, seed=9, init=2)
    )


def test_train_alternating_sequence():
    # x = 0101010101, k=1: state 0 occurs before positions 1,3,5,7,9 and is
    # always followed by 1; state 1 before positions 2,4,6,8, followed by 0.
    model = train(as_bits([0, 1, 0, 1, 0, 1, 0, 1, 0, 1]), 1)
    assert model.visits.tolist() == [5, 4]
    assert model.estimates.emit_one.tolist() == [1.0, 0.0]
    assert model.decisions.decisions.tolist() == [1, 0]


def test_train_only_one_state_observed():
    model = train(as_bits([1, 1, 1, 1]), 2)
    assert model.visits.tolist() == [0, 0, 0, 2]
    assert model.estimates.emit_one.tolist() == [0.5, 0.5, 0.5, 1.0]
    assert model.decisions.decisions.tolist() == [0, 0, 0, 1]


def test_train_sequence_of_length_k_is_degenerate():
    model = train(as_bits([1, 0, 1]), 3)
    assert model.visits.tolist() == [0] * 8
    assert model.estimates.emit_one.tolist() == [0.5] * 8
    assert model.decisions.decisions.tolist() == [0] * 8


def test_train_rejects_order_zero():
    with pytest.raises(ValueError):
        train(as_bits([0, 1]), 0)


def test_train_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        k = int(rng.integers(1, 9))
        x = as_bits(rng.integers(0, 2, int(rng.integers(k + 1, 400))))
        model = train(x, k)
        visits, ones = brute_force_counts(x, k)
        assert model.visits.tolist() == visits
        for i in range(2**k):
            expected = ones[i] / visits[i] if visits[i] else 0.5
            assert model.estimates.emit_one[i] == pytest.approx(expected)


def test_extract_outcome_definitions():
    # Test bits (1,1,0) against predictions (0,1,0): mistakes are (1,0,0);
    # the 0-predictions sit at slots 1 and 3, so the mistake subsequence on
    # zeros is (1,0) and equals the test bits there; its ones-share is 1/2.
    outcome = extract_outcome(as_bits([1, 1, 0]), as_bits([0, 1, 0]))
    assert outcome.mistakes.tolist() == [1, 0, 0]
    assert outcome.mistakes_on_zero.tolist() == [1, 0]
    assert outcome.n0 == 2
    assert outcome.p0_hat == pytest.approx(0.5)
    assert outcome.overall_error == pytest.approx(1 / 3)


def test_predict_perfect_on_deterministic_source():
    table = TransitionTable(order=1, emit_one=[1.0, 0.0])
    x = generate(table, 50, seed=1, init=0)
    outcome = predict(DecisionVector(order=1, decisions=[1, 0]), x)
    assert outcome.overall_error == 0.0
    assert outcome.mistakes.sum() == 0
    assert outcome.p0_hat == 0.0


def test_predict_all_zero_decisions_copies_input():
    x = random_bernoulli(400, 0.5, seed=8)
    outcome = predict(DecisionVector(order=2, decisions=[0, 0, 0, 0]), x)
    assert np.array_equal(outcome.mistakes_on_zero, x[2:])
    assert outcome.n0 == 398
    assert abs(outcome.p0_hat - 0.5) < 0.1


def test_predict_requires_longer_input():
    with pytest.raises(ValueError):
        predict(DecisionVector(order=3, decisions=[0] * 8), as_bits([1, 0, 1]))


def test_predict_no_zero_predictions_leaves_rate_undefined():
    x = random_bernoulli(50, 0.5, seed=3)
    outcome = predict(DecisionVector(order=1, decisions=[1, 1]), x)
    assert outcome.n0 == 0
    assert outcome.p0_hat is None
    assert outcome.mistakes_on_zero.size == 0


def test_mistake_subsequence_dual_reconstruction():
    rng = np.random.default_rng(77)
    for _ in range(50):
        k = int(rng.integers(1, 7))
        x = as_bits(rng.integers(0, 2, int(rng.integers(k + 1, 250))))
        d = DecisionVector(order=k, decisions=rng.integers(0, 2, 2**k))
        outcome = predict(d, x)
        zero_mask = outcome.predictions == 0
        from_mistakes = outcome.mistakes[zero_mask]
        from_input = np.asarray(x[k:])[zero_mask]
        assert np.array_equal(outcome.mistakes_on_zero, from_mistakes)
        assert np.array_equal(outcome.mistakes_on_zero, from_input)
        assert outcome.n0 + int((outcome.predictions == 1).sum()) == x.size - k


def test_underfit_estimates_stay_near_half():
    # Below the source order every learner state sees an exactly even
    # conditional distribution, so large-sample estimates hug 1/2.
    x = generate(half_split_source(5), 10000, seed=11, init=0)
    for k in (1, 2, 3, 4):
        est = train(x, k).estimates.emit_one
        assert np.abs(est - 0.5).max() < 0.05
