"""Sign aggregation: majority vote, LLR-weighted majority vote, and an ML oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .channel import ParallelChannels
from .core import sign_of, sign_word

MAX_ENUMERATION_WORKERS = 20


@dataclass(frozen=True)
class DecodeOutcome:
    decision: int
    score: float


def llr_weight(p):
    """ln((1-p)/p). Accepts scalars or arrays; p must lie strictly inside (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any((arr <= 0.0) | (arr >= 1.0)) or not np.all(np.isfinite(arr)):
        raise ValueError("LLR weight needs 0 < p < 1; clamp estimates first")
    w = np.log1p(-arr) - np.log(arr)
    return float(w) if w.ndim == 0 else w


def weight_vector(weights, workers: int | None = None) -> np.ndarray:
    w = np.asarray(weights, dtype=float).ravel()
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if workers is not None and w.size != workers:
        raise ValueError(f"got {w.size} weights for {workers} workers")
    return w


def majority_vote(word) -> DecodeOutcome:
    word = sign_word(word)
    score = int(word.sum(dtype=np.int64))
    return DecodeOutcome(sign_of(score), float(score))


def weighted_majority_vote(word, weights) -> DecodeOutcome:
    word = sign_word(word)
    w = weight_vector(weights, word.size)
    score = float(kernels.weighted_scores(word[:, None], w[:, None])[0])
    return DecodeOutcome(sign_of(score), score)


def ml_oracle(word, channels: ParallelChannels) -> int:
    """Maximum-likelihood decision computed from the two log-likelihoods directly."""
    word = sign_word(word, len(channels))
    p = channels.p
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("ML oracle needs every cross-over probability in (0, 1)")
    ll_plus = 0.0
    ll_minus = 0.0
    for y, pm in zip(word.tolist(), p.tolist()):
        if y == 1:
            ll_plus += math.log(1.0 - pm)
            ll_minus += math.log(pm)
        else:
            ll_plus += math.log(pm)
            ll_minus += math.log(1.0 - pm)
    return 1 if ll_plus >= ll_minus else -1


# Vectorised forms over all N coordinates of a round. words has shape (M, N).

def majority_vote_many(words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scores = kernels.vote_counts(words)
    return np.where(scores >= 0, 1, -1).astype(np.int8), scores


def weighted_vote_many(words: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if weights.ndim == 1:
        weights = np.broadcast_to(weights[:, None], words.shape)
    scores = kernels.weighted_scores(words, np.ascontiguousarray(weights, dtype=float))
    return kernels.decide(scores), scores


class ErrorProbability(NamedTuple):
    given_plus: float
    given_minus: float

    @property
    def average(self) -> float:
        return 0.5 * (self.given_plus + self.given_minus)

    @property
    def worst(self) -> float:
        return max(self.given_plus, self.given_minus)


def decode_error_probability_exact(channels: ParallelChannels, weights) -> ErrorProbability:
    """Exact decoding error of the weighted vote by enumerating all 2^M words.

    Ties decode to +1, so the two truth conditionings can differ.
    """
    M = len(channels)
    if M > MAX_ENUMERATION_WORKERS:
        raise ValueError(f"exhaustive enumeration limited to M <= {MAX_ENUMERATION_WORKERS}, got {M}")
    w = weight_vector(weights, M)
    plus, minus = kernels.enumerate_errors(np.ascontiguousarray(channels.p), np.ascontiguousarray(w))
    return ErrorProbability(float(plus), float(minus))
