"""Stochasticity measurements on bit sequences.

The central quantity is the divergence of a sequence's short-word statistics
from those of a memoryless coin with the sequence's own ones-frequency: a
sequence that is "random" in the frequency-stability sense sits near zero.
Words are read most-significant-bit-first, matching the state convention of
:mod:`mistakelab.markov`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DivergenceUndefinedError",
    "WordDistribution",
    "bernoulli_word_dist",
    "empirical_word_dist",
    "frequency_deviation",
    "kl_divergence",
    "pearson",
    "skewness_kurtosis",
]


class DivergenceUndefinedError(ValueError):
    """Model distribution has zero mass somewhere the empirical one does not."""


@dataclass(frozen=True)
class WordDistribution:
    """Probabilities of the 2**word_len binary words, indexed by word value."""

    word_len: int
    probs: np.ndarray

    def __post_init__(self):
        if self.word_len < 1:
            raise ValueError(f"word_len must be >= 1, got {self.word_len}")
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (2**self.word_len,):
            raise ValueError(
                f"expected {2**self.word_len} probabilities, got {probs.shape}"
            )
        if probs.min() < 0.0 or probs.max() > 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


def empirical_word_dist(
    seq: np.ndarray, w: int = 4, scheme: str = "sliding"
) -> WordDistribution:
    """Frequencies of length-w words in the sequence.

    The default scheme counts every overlapping window, which keeps the
    sample count high on short sequences; "disjoint" counts consecutive
    non-overlapping blocks instead.
    """
    seq = np.asarray(seq, dtype=np.int64)
    if seq.size < w:
        raise ValueError(
            f"sequence of length {seq.size} is too short for words of length {w}"
        )
    windows = np.lib.stride_tricks.sliding_window_view(seq, w)
    if scheme == "sliding":
        pass
    elif scheme == "disjoint":
        windows = windows[::w]
    else:
        raise ValueError(f"unknown window scheme: {scheme!r}")
    powers = 1 << np.arange(w - 1, -1, -1, dtype=np.int64)
    words = windows @ powers
    counts = np.bincount(words, minlength=2**w)
    return WordDistribution(word_len=w, probs=counts / counts.sum())


def bernoulli_word_dist(p: float, w: int = 4) -> WordDistribution:
    """Word distribution of a memoryless source emitting 1 with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    ones = np.array([bin(v).count("1") for v in range(2**w)])
    probs = np.power(p, ones) * np.power(1.0 - p, w - ones)
    return WordDistribution(word_len=w, probs=probs)


def kl_divergence(empirical: WordDistribution, model: WordDistribution) -> float:
    """D(empirical || model) in bits; zero exactly when the two agree."""
    if empirical.word_len != model.word_len:
        raise ValueError("word lengths differ")
    p = empirical.probs
    q = model.probs
    support = p > 0.0
    if np.any(q[support] <= 0.0):
        raise DivergenceUndefinedError(
            "model assigns zero probability inside the empirical support"
        )
    return float(np.sum(p[support] * np.log2(p[support] / q[support])))


def frequency_deviation(seq: np.ndarray, p: float) -> float:
    """Absolute gap between the ones-frequency of the sequence and p."""
    seq = np.asarray(seq, dtype=np.uint8)
    if seq.size == 0:
        raise ValueError("sequence must be nonempty")
    return abs(float(seq.mean()) - p)


def pearson(xs, ys) -> float:
    """Sample Pearson correlation; undefined for constant input."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be one-dimensional with equal length")
    if x.size < 2:
        raise ValueError("need at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt(np.sum(dx * dx))
    sy = np.sqrt(np.sum(dy * dy))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined for constant input")
    return float(np.sum(dx * dy) / (sx * sy))


def skewness_kurtosis(xs) -> tuple[float, float]:
    """Population-moment skewness and excess kurtosis (both zero for a
    normal distribution)."""
    x = np.asarray(xs, dtype=np.float64)
    if x.size < 3:
        raise ValueError("need at least three points")
    d = x - x.mean()
    m2 = np.mean(d**2)
    if m2 == 0.0:
        raise ValueError("moments undefined for constant input")
    g1 = np.mean(d**3) / m2**1.5
    g2 = np.mean(d**4) / m2**2 - 3.0
    return float(g1), float(g2)
