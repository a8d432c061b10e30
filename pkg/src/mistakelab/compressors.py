"""Complexity estimators: compressed file length as a stand-in for the
shortest-description length of a sequence.

Two coders are provided.  LZ_FAMILY is DEFLATE in a standard gzip container
(fixed header with zeroed timestamp, CRC32 and length trailer); the container
overhead is kept on purpose, since the information-density ratio of very small
decision files staying above 1 is part of the behaviour under study.  PPM is
the adaptive context coder from :mod:`mistakelab.ppm` with minimal framing, so
its ratios stay meaningful on small files.

Lengths include all framing bytes.  ``compressed_bits`` is always
``8 * compressed_bytes``.
"""

from __future__ import annotations

import gzip
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .markov import DecisionVector
from .ppm import PPM_DEFAULT_ORDER, ppm_compress, ppm_decompress
from .sequences import encode_ascii

__all__ = [
    "ComplexityEstimate",
    "CompressorKind",
    "binary_entropy",
    "compress_bytes",
    "decompress_bytes",
    "entropy_bound",
    "estimate_complexity",
    "lz_compress",
    "lz_decompress",
    "sys_ratio",
]


class CompressorKind(Enum):
    LZ_FAMILY = "lz"
    PPM = "ppm"


@dataclass(frozen=True)
class ComplexityEstimate:
    compressed_bytes: int
    compressed_bits: int
    kind: CompressorKind


def lz_compress(data: bytes) -> bytes:
    """DEFLATE at maximum effort inside a gzip container.

    The timestamp field is zeroed so identical input gives identical output
    across calls and processes.
    """
    return gzip.compress(data, compresslevel=9, mtime=0)


def lz_decompress(stream: bytes) -> bytes:
    return gzip.decompress(stream)


def compress_bytes(
    data: bytes, kind: CompressorKind, ppm_order: int = PPM_DEFAULT_ORDER
) -> bytes:
    if kind is CompressorKind.LZ_FAMILY:
        return lz_compress(data)
    if kind is CompressorKind.PPM:
        return ppm_compress(data, order=ppm_order)
    raise ValueError(f"unknown compressor kind: {kind!r}")


def decompress_bytes(
    stream: bytes, kind: CompressorKind, ppm_order: int = PPM_DEFAULT_ORDER
) -> bytes:
    if kind is CompressorKind.LZ_FAMILY:
        return lz_decompress(stream)
    if kind is CompressorKind.PPM:
        return ppm_decompress(stream, order=ppm_order)
    raise ValueError(f"unknown compressor kind: {kind!r}")


def estimate_complexity(
    seq: np.ndarray, kind: CompressorKind, ppm_order: int = PPM_DEFAULT_ORDER
) -> ComplexityEstimate:
    """Compressed length of the sequence's one-byte-per-bit encoding."""
    n_bytes = len(compress_bytes(encode_ascii(seq), kind, ppm_order))
    return ComplexityEstimate(
        compressed_bytes=n_bytes, compressed_bits=8 * n_bytes, kind=kind
    )


def sys_ratio(
    d: DecisionVector, kind: CompressorKind, ppm_order: int = PPM_DEFAULT_ORDER
) -> float:
    """Information density of a decision rule: compressed over uncompressed
    length of its stored form (2**order bytes uncompressed)."""
    compressed = len(compress_bytes(encode_ascii(d.decisions), kind, ppm_order))
    return compressed / d.n_states


def binary_entropy(p: float) -> float:
    """H(p) in bits, with the 0 * log 0 = 0 convention at the endpoints."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def entropy_bound(n0: int, p: float) -> float:
    """Bits needed to describe an n0-bit sequence with ones-frequency p:
    n0 * H(p) + log2(n0) / 2, the additive constant taken as zero."""
    if n0 < 1:
        raise ValueError(f"n0 must be >= 1, got {n0}")
    return n0 * binary_entropy(p) + 0.5 * math.log2(n0)
