"""Markov sources and learners over binary alphabets.

A model of order k has 2**k states, one per k-bit history word.  The word is
read most-significant-bit-first: the oldest bit of the history is the MSB of
the state index.  After emitting bit b the state updates as
``((state << 1) | b) & (2**k - 1)``.

Training estimates per-state emission frequencies from a sequence; prediction
applies a per-state decision table and records the mistake sequence plus the
mistake subsequence at 0-predicted positions, which is the object whose
randomness the rest of the lab measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sequences import as_bits

__all__ = [
    "DecisionVector",
    "PredictionOutcome",
    "TrainedModel",
    "TransitionTable",
    "bayes_predictor",
    "extract_outcome",
    "generate",
    "half_split_source",
    "predict",
    "state_indices",
    "train",
]


@dataclass(frozen=True)
class TransitionTable:
    """Order-k emission table: emit_one[i] = P(next bit is 1 | state i)."""

    order: int
    emit_one: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        probs = np.asarray(self.emit_one, dtype=np.float64)
        if probs.shape != (2**self.order,):
            raise ValueError(
                f"expected {2**self.order} probabilities for order {self.order}, "
                f"got shape {probs.shape}"
            )
        if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
            raise ValueError("emission probabilities must lie in [0, 1]")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "emit_one", probs)

    @property
    def n_states(self) -> int:
        return 2**self.order


@dataclass(frozen=True)
class DecisionVector:
    """Per-state MAP bit decisions; the learner's entire prediction rule."""

    order: int
    decisions: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        bits = as_bits(self.decisions)
        if bits.shape != (2**self.order,):
            raise ValueError(
                f"expected {2**self.order} decisions for order {self.order}, "
                f"got shape {bits.shape}"
            )
        object.__setattr__(self, "decisions", bits)

    @property
    def n_states(self) -> int:
        return 2**self.order


@dataclass(frozen=True)
class TrainedModel:
    """Frequency estimates, visit counts, and the induced decision vector."""

    estimates: TransitionTable
    decisions: DecisionVector
    visits: np.ndarray

    @property
    def order(self) -> int:
        return self.estimates.order


@dataclass(frozen=True)
class PredictionOutcome:
    """Per-position predictions and the derived mistake sequences.

    predictions  y_t for the n - k effective positions (first k bits seed
                 the state and receive no prediction)
    mistakes     1 where the prediction differs from the test bit
    mistakes_on_zero
                 restriction of the mistake sequence to 0-predicted
                 positions; identically the test bits at those positions
    """

    predictions: np.ndarray
    mistakes: np.ndarray
    mistakes_on_zero: np.ndarray
    n0: int
    p0_hat: float | None
    overall_error: float

    @property
    def effective_length(self) -> int:
        return int(self.predictions.size)


def half_split_source(k_star: int) -> TransitionTable:
    """Benchmark source: the low half of the states emits 1 with probability
    0.7, the high half with probability 0.3.

    The best achievable per-prediction error on this source is 0.3, while any
    model of order below k_star sees an exactly even conditional distribution
    at every state and cannot beat coin flipping.
    """
    if k_star < 1:
        raise ValueError(f"k_star must be >= 1, got {k_star}")
    n = 2**k_star
    emit = np.full(n, 0.3)
    emit[: n // 2] = 0.7
    return TransitionTable(order=k_star, emit_one=emit)


def generate(
    table: TransitionTable, n: int, seed: int, init: int = 0
) -> np.ndarray:
    """Emit n bits from the source, starting at state index ``init``."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if not 0 <= init < table.n_states:
        raise ValueError(
            f"init must be a state index below {table.n_states}, got {init}"
        )
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    uniforms = rng.random(n)
    emit = table.emit_one
    mask = table.n_states - 1
    out = np.empty(n, dtype=np.uint8)
    state = init
    for t in range(n):
        bit = 1 if uniforms[t] < emit[state] else 0
        out[t] = bit
        state = ((state << 1) | bit) & mask
    out.setflags(write=False)
    return out


def state_indices(x: np.ndarray, k: int) -> np.ndarray:
    """State index before each position t in [k, len(x)): the k preceding
    bits read MSB-first."""
    x = np.asarray(x, dtype=np.int64)
    if x.size <= k:
        return np.empty(0, dtype=np.int64)
    windows = np.lib.stride_tricks.sliding_window_view(x[:-1], k)
    powers = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
    return windows @ powers


def train(x: np.ndarray, k: int) -> TrainedModel:
    """Estimate per-state emission frequencies from x.

    visits[i] counts positions whose preceding k bits equal state word i;
    estimates default to 1/2 for unvisited states, and the decision is 1 only
    on a strict majority of ones (ties and unvisited states decide 0).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    x = np.asarray(x, dtype=np.uint8)
    n_states = 2**k
    states = state_indices(x, k)
    visits = np.bincount(states, minlength=n_states).astype(np.int64)
    ones = np.bincount(
        states, weights=x[k:].astype(np.float64), minlength=n_states
    )
    estimates = np.full(n_states, 0.5)
    seen = visits > 0
    estimates[seen] = ones[seen] / visits[seen]
    decisions = (estimates > 0.5).astype(np.uint8)
    visits.setflags(write=False)
    return TrainedModel(
        estimates=TransitionTable(order=k, emit_one=estimates),
        decisions=DecisionVector(order=k, decisions=decisions),
        visits=visits,
    )


def extract_outcome(x_effective: np.ndarray, y: np.ndarray) -> PredictionOutcome:
    """Derive mistake sequences from test bits and predictions pairwise.

    ``x_effective`` holds the test bits at predicted positions only.  At a
    0-predicted position a mistake means the test bit was 1, so the mistake
    subsequence on zeros equals the test bits there; both reconstructions are
    the same array.
    """
    x_eff = np.asarray(x_effective, dtype=np.uint8)
    y = np.asarray(y, dtype=np.uint8)
    if x_eff.shape != y.shape:
        raise ValueError("predictions and test bits must align")
    mistakes = (y != x_eff).astype(np.uint8)
    zero_positions = y == 0
    xi0 = mistakes[zero_positions]
    n0 = int(xi0.size)
    # With no 0-predictions the error rate on them is 0/0: undefined, not 0.
    p0_hat = float(xi0.mean()) if n0 else None
    overall = float(mistakes.mean()) if mistakes.size else 0.0
    for arr in (y, mistakes, xi0):
        arr.setflags(write=False)
    return PredictionOutcome(
        predictions=y,
        mistakes=mistakes,
        mistakes_on_zero=xi0,
        n0=n0,
        p0_hat=p0_hat,
        overall_error=overall,
    )


def predict(model: DecisionVector, x: np.ndarray) -> PredictionOutcome:
    """Apply the decision table along x and collect the mistake sequences.

    The first k bits only seed the state, so the effective test length is
    len(x) - k.
    """
    x = np.asarray(x, dtype=np.uint8)
    k = model.order
    if x.size <= k:
        raise ValueError(
            f"test sequence of length {x.size} is too short for order {k}"
        )
    states = state_indices(x, k)
    y = model.decisions[states]
    return extract_outcome(x[k:], y)


def bayes_predictor(table: TransitionTable) -> DecisionVector:
    """Decision table of the rule that knows the true emission probabilities."""
    decisions = (table.emit_one > 0.5).astype(np.uint8)
    return DecisionVector(order=table.order, decisions=decisions)
