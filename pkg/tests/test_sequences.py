import numpy as np
import pytest

from mistakelab.markov import half_split_source, generate, train
from mistakelab.sequences import (
    as_bits,
    decode_ascii,
    encode_ascii,
    random_bernoulli,
    read_bits,
    write_bits,
)


def test_encode_ascii_empty():
    assert encode_ascii(as_bits([])) == b""


def test_encode_ascii_maps_bits_to_digit_bytes():
    assert encode_ascii(as_bits([1, 0, 1])) == bytes([0x31, 0x30, 0x31])


def test_encode_ascii_order4_decision_vector_is_16_bytes():
    x = generate(half_split_source(5), 2000, seed=42, init=0)
    d = train(x, 4).decisions
    assert len(encode_ascii(d.decisions)) == 16


def test_encode_decode_round_trip_and_length():
    rng = np.random.default_rng(7)
    for _ in range(50):
        bits = as_bits(rng.integers(0, 2, rng.integers(0, 300)))
        data = encode_ascii(bits)
        assert len(data) == bits.size
        assert np.array_equal(decode_ascii(data), bits)


def test_encode_ascii_injective_on_distinct_inputs():
    seqs = [[0], [1], [0, 0], [0, 1], [1, 0], [1, 1], [1, 0, 1]]
    encoded = [encode_ascii(as_bits(s)) for s in seqs]
    assert len(set(encoded)) == len(encoded)


def test_decode_ascii_rejects_other_bytes():
    with pytest.raises(ValueError):
        decode_ascii(b"0102")


def test_as_bits_rejects_non_binary():
    with pytest.raises(ValueError):
        as_bits([0, 2, 1])


def test_random_bernoulli_degenerate_probabilities():
    assert random_bernoulli(8, 0.0, seed=1).tolist() == [0] * 8
    assert random_bernoulli(8, 1.0, seed=1).tolist() == [1] * 8


def test_random_bernoulli_frequency_band():
    # Binomial(10000, 0.5): a 99.99% interval is 0.5 +/- 3.89 * 0.005,
    # comfortably inside the asserted band.
    bits = random_bernoulli(10000, 0.5, seed=3)
    assert 0.47 <= bits.mean() <= 0.53


def test_random_bernoulli_deterministic():
    a = random_bernoulli(1000, 0.3, seed=99)
    b = random_bernoulli(1000, 0.3, seed=99)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, random_bernoulli(1000, 0.3, seed=100))


def test_random_bernoulli_rejects_bad_probability():
    with pytest.raises(ValueError):
        random_bernoulli(10, -0.1, seed=1)
    with pytest.raises(ValueError):
        random_bernoulli(10, 1.1, seed=1)


def test_bit_file_round_trip_is_byte_per_bit(tmp_path):
    bits = random_bernoulli(257, 0.5, seed=5)
    path = tmp_path / "bits.txt"
    write_bits(path, bits)
    assert path.stat().st_size == 257
    assert np.array_equal(read_bits(path), bits)
