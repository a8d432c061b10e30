import math

import numpy as np
import pytest

from mistakelab.metrics import (
    DivergenceUndefinedError,
    WordDistribution,
    bernoulli_word_dist,
    empirical_word_dist,
    frequency_deviation,
    kl_divergence,
    pearson,
    skewness_kurtosis,
)
from mistakelab.sequences import as_bits, random_bernoulli


def test_empirical_single_window():
    dist = empirical_word_dist(as_bits([0, 0, 0, 0]), 4)
    assert dist.probs[0] == 1.0
    assert dist.probs[1:].sum() == 0.0


def test_empirical_sliding_windows():
    # 11110000 has five 4-windows: 1111, 1110, 1100, 1000, 0000 ->
    # word values 15, 14, 12, 8, 0, each with probability 1/5.
    dist = empirical_word_dist(as_bits([1, 1, 1, 1, 0, 0, 0, 0]), 4)
    for value in (15, 14, 12, 8, 0):
        assert dist.probs[value] == pytest.approx(0.2)
    assert dist.probs.sum() == pytest.approx(1.0)


def test_empirical_short_sequence():
    # 0101 has 2-windows 01, 10, 01.
    dist = empirical_word_dist(as_bits([0, 1, 0, 1]), 2)
    assert dist.probs[0b01] == pytest.approx(2 / 3)
    assert dist.probs[0b10] == pytest.approx(1 / 3)


def test_empirical_disjoint_scheme():
    dist = empirical_word_dist(as_bits([0, 1, 0, 1]), 2, scheme="disjoint")
    assert dist.probs[0b01] == 1.0


def test_empirical_rejects_short_input_and_bad_scheme():
    with pytest.raises(ValueError):
        empirical_word_dist(as_bits([1, 0]), 4)
    with pytest.raises(ValueError):
        empirical_word_dist(as_bits([1, 0, 1, 0]), 2, scheme="hopping")


def test_empirical_complement_symmetry():
    rng = np.random.default_rng(5)
    for _ in range(25):
        w = int(rng.integers(1, 6))
        seq = as_bits(rng.integers(0, 2, int(rng.integers(w, 200))))
        direct = empirical_word_dist(seq, w).probs
        flipped = empirical_word_dist(as_bits(1 - np.asarray(seq)), w).probs
        mask = 2**w - 1
        assert np.allclose(direct, flipped[[mask - u for u in range(2**w)]])


def test_bernoulli_dist_uniform_at_half():
    assert np.allclose(bernoulli_word_dist(0.5, 4).probs, 1 / 16)


def test_bernoulli_dist_point_mass_at_zero():
    probs = bernoulli_word_dist(0.0, 4).probs
    assert probs[0] == 1.0
    assert probs[1:].sum() == 0.0


def test_bernoulli_dist_closed_form():
    assert np.allclose(bernoulli_word_dist(0.3, 2).probs, [0.49, 0.21, 0.21, 0.09])


def test_bernoulli_dist_sums_to_one_on_dense_grid():
    for p in np.linspace(0.0, 1.0, 101):
        for w in (1, 2, 4, 6):
            assert abs(bernoulli_word_dist(float(p), w).probs.sum() - 1.0) <= 1e-12


def test_kl_zero_for_identical():
    d = bernoulli_word_dist(0.3, 4)
    assert kl_divergence(d, d) == 0.0


def test_kl_zero_for_degenerate_match():
    empirical = empirical_word_dist(as_bits([0] * 10), 4)
    model = bernoulli_word_dist(0.0, 4)
    assert kl_divergence(empirical, model) == 0.0


def test_kl_hand_computed_value():
    # Empirical: uniform over its 5 observed words; model: uniform 1/16.
    # KL = sum of (1/5) * log2((1/5)/(1/16)) = log2(16/5).
    empirical = empirical_word_dist(as_bits([1, 1, 1, 1, 0, 0, 0, 0]), 4)
    model = bernoulli_word_dist(0.5, 4)
    assert kl_divergence(empirical, model) == pytest.approx(math.log2(16 / 5))


def test_kl_support_violation():
    empirical = empirical_word_dist(as_bits([1, 0, 1, 0, 1]), 4)
    model = bernoulli_word_dist(0.0, 4)
    with pytest.raises(DivergenceUndefinedError):
        kl_divergence(empirical, model)


def test_kl_rejects_mismatched_word_lengths():
    with pytest.raises(ValueError):
        kl_divergence(bernoulli_word_dist(0.5, 2), bernoulli_word_dist(0.5, 3))


def test_kl_nonnegative_with_equality_iff_equal():
    rng = np.random.default_rng(101)
    for _ in range(100):
        w = int(rng.integers(1, 5))
        raw = rng.random(2**w) + 1e-3
        p = WordDistribution(w, raw / raw.sum())
        raw2 = rng.random(2**w) + 1e-3
        q = WordDistribution(w, raw2 / raw2.sum())
        assert kl_divergence(p, q) > 0.0
        assert kl_divergence(p, p) == 0.0


def test_frequency_deviation_examples():
    assert frequency_deviation(as_bits([1, 0, 1, 0]), 0.5) == 0.0
    assert frequency_deviation(as_bits([1, 1, 1, 1]), 0.5) == 0.5
    assert frequency_deviation(as_bits([1, 1, 0, 1]), 0.25) == 0.5
    with pytest.raises(ValueError):
        frequency_deviation(as_bits([]), 0.5)


def test_pearson_affine_and_hand_value():
    xs = [1.0, 2.0, 3.0, 4.0]
    assert pearson(xs, [2 * x + 1 for x in xs]) == pytest.approx(1.0)
    assert pearson(xs, [-x for x in xs]) == pytest.approx(-1.0)
    # Deviations: x: (-1,0,1), y: (-1,1,0); r = 1 / (sqrt(2)*sqrt(2)) = 0.5.
    assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)


def test_pearson_affine_invariance_and_sign_flip():
    rng = np.random.default_rng(3)
    xs = rng.random(40)
    ys = rng.random(40)
    base = pearson(xs, ys)
    assert pearson(3.5 * xs + 2, ys) == pytest.approx(base)
    assert pearson(xs, 0.1 * ys - 4) == pytest.approx(base)
    assert pearson(-2 * xs, ys) == pytest.approx(-base)


def test_pearson_rejects_constant_input():
    with pytest.raises(ValueError):
        pearson([1, 1, 1], [1, 2, 3])


def test_skewness_symmetric_is_zero():
    g1, _ = skewness_kurtosis([-1.0, 0.0, 1.0])
    assert g1 == pytest.approx(0.0)


def test_skewness_hand_value():
    # For (0,0,0,1): m2 = 3/16, m3 = 3/32, so g1 = (3/32)/(3/16)^1.5 = 2/sqrt(3).
    g1, _ = skewness_kurtosis([0.0, 0.0, 0.0, 1.0])
    assert g1 == pytest.approx(2 / math.sqrt(3))


def test_skewness_kurtosis_of_normal_samples():
    rng = np.random.default_rng(12)
    samples = rng.standard_normal(100000)
    g1, g2 = skewness_kurtosis(samples)
    assert abs(g1) < 0.05
    assert abs(g2) < 0.1


def test_skewness_rejects_constant_input():
    with pytest.raises(ValueError):
        skewness_kurtosis([2.0, 2.0, 2.0])


def test_bernoulli_sequences_sit_near_zero_divergence():
    # A memoryless sequence measured against its own ones-share should show
    # only the small-sample divergence floor.
    deltas = []
    for seed in range(50):
        bits = random_bernoulli(1000, 0.5, seed=seed)
        empirical = empirical_word_dist(bits, 4)
        deltas.append(kl_divergence(empirical, bernoulli_word_dist(bits.mean(), 4)))
    assert float(np.mean(deltas)) < 0.05
