"""Bit sequences: the payload type shared by every stage of the lab.

A bit sequence is a read-only numpy array of uint8 values 0/1.  Sequences
persist as text files of '0'/'1' characters with no trailing newline, so the
file size in bytes always equals the sequence length.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_bits",
    "decode_ascii",
    "encode_ascii",
    "random_bernoulli",
    "read_bits",
    "write_bits",
]


def as_bits(values) -> np.ndarray:
    """Coerce an iterable of 0/1 values to a read-only uint8 array."""
    bits = np.asarray(values, dtype=np.uint8)
    if bits.ndim != 1:
        raise ValueError("bit sequence must be one-dimensional")
    if bits.size and bits.max() > 1:
        raise ValueError("bit sequence may contain only 0 and 1")
    bits = bits.copy()
    bits.setflags(write=False)
    return bits


def encode_ascii(bits: np.ndarray) -> bytes:
    """Encode one byte per bit: 0 -> '0' (0x30), 1 -> '1' (0x31).

    This is the on-disk and pre-compression representation; it is injective
    and length-preserving (output bytes == input bits), which keeps the
    uncompressed length of a stored vector equal to its bit count.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    return (bits + ord("0")).astype(np.uint8).tobytes()


def decode_ascii(data: bytes) -> np.ndarray:
    """Inverse of :func:`encode_ascii`; rejects any byte other than '0'/'1'."""
    raw = np.frombuffer(data, dtype=np.uint8)
    if raw.size and not np.isin(raw, (ord("0"), ord("1"))).all():
        raise ValueError("input contains bytes other than '0' and '1'")
    bits = (raw - ord("0")).astype(np.uint8)
    bits.setflags(write=False)
    return bits


def random_bernoulli(n: int, p: float, seed: int) -> np.ndarray:
    """n independent Bernoulli(p) bits, reproducible from the 64-bit seed.

    The stream is PCG64 seeded through numpy's SeedSequence, so identical
    (n, p, seed) give bit-identical output across calls and processes.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    bits = (rng.random(n) < p).astype(np.uint8)
    bits.setflags(write=False)
    return bits


def write_bits(path, bits: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_ascii(bits))


def read_bits(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_ascii(fh.read())
