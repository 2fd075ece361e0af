"""Online cross-over probability and LLR weight estimation for federated voting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .decode import llr_weight

DEFAULT_CLAMP = 1e-3


class CrossoverState:
    """Per-(worker, coordinate) mismatch counts against the server's decoded signs.

    The estimate after t rounds is the cumulative mismatch fraction over all
    rounds so far, clamped to [eps, 1 - eps] so weights stay finite. With
    ``pooled=True`` counts are averaged over coordinates for each worker.
    """

    def __init__(self, workers: int, dimension: int, eps: float = DEFAULT_CLAMP, pooled: bool = False):
        if not 0.0 < eps < 0.5:
            raise ValueError(f"clamp eps must lie in (0, 0.5), got {eps}")
        self.workers = int(workers)
        self.dimension = int(dimension)
        self.eps = float(eps)
        self.pooled = bool(pooled)
        self.mismatches = np.zeros((self.workers, self.dimension), dtype=np.int64)
        self.rounds = 0
        self._p_hat = None
        self._w_hat = None

    def record_round(self, words: np.ndarray, decoded: np.ndarray) -> "CrossoverState":
        words = np.asarray(words)
        decoded = np.asarray(decoded)
        if words.shape != (self.workers, self.dimension):
            raise ValueError(f"expected words of shape {(self.workers, self.dimension)}, got {words.shape}")
        if decoded.shape != (self.dimension,):
            raise ValueError(f"expected {self.dimension} decoded signs, got shape {decoded.shape}")
        kernels.count_mismatches(self.mismatches, words.astype(np.int8, copy=False), decoded.astype(np.int8, copy=False))
        self.rounds += 1
        self._p_hat = None
        self._w_hat = None
        return self

    @property
    def p_hat(self) -> np.ndarray:
        if self._p_hat is None:
            if self.rounds == 0:
                self._p_hat = np.full((self.workers, self.dimension), 0.5)
            else:
                if self.pooled:
                    frac = self.mismatches.sum(axis=1) / (self.rounds * self.dimension)
                    frac = np.repeat(frac[:, None], self.dimension, axis=1)
                else:
                    frac = self.mismatches / self.rounds
                self._p_hat = np.clip(frac, self.eps, 1.0 - self.eps)
        return self._p_hat

    @property
    def w_hat(self) -> np.ndarray:
        if self._w_hat is None:
            if self.rounds == 0:
                self._w_hat = np.ones((self.workers, self.dimension))
            else:
                self._w_hat = llr_weight(self.p_hat)
        return self._w_hat

    def current_weights(self, t: int, initial_phase: int) -> np.ndarray:
        """Weights the server uses in round t: all ones while t <= T_in."""
        if t < 1:
            raise ValueError("rounds are numbered from 1")
        if t <= initial_phase:
            return np.ones((self.workers, self.dimension))
        return self.w_hat

    def snapshot(self, max_entries: int = 10_000) -> dict:
        p = self.p_hat
        out = {
            "rounds": self.rounds,
            "eps": self.eps,
            "pooled": self.pooled,
            "p_hat_worker_mean": p.mean(axis=1).tolist(),
            "w_hat_worker_mean": self.w_hat.mean(axis=1).tolist(),
        }
        if p.size <= max_entries:
            out["mismatches"] = self.mismatches.tolist()
        return out


def record_round(state: CrossoverState, words, decoded) -> CrossoverState:
    return state.record_round(words, decoded)


def current_weights(state: CrossoverState, t: int, initial_phase: int) -> np.ndarray:
    return state.current_weights(t, initial_phase)


@dataclass(frozen=True)
class WeightUncertainty:
    delta_min: float
    delta_max: float

    @property
    def factor(self) -> float:
        """(1 - delta_min) / (1 + delta_max), the exponent shrinkage."""
        return (1.0 - self.delta_min) / (1.0 + self.delta_max)


class UncertaintyTracker:
    """Running extremes of estimated/true weight ratios."""

    def __init__(self):
        self.lo = np.inf
        self.hi = -np.inf

    def update(self, w_hat, w_true):
        ratio = np.asarray(w_hat, dtype=float) / np.asarray(w_true, dtype=float)
        self.lo = min(self.lo, float(ratio.min()))
        self.hi = max(self.hi, float(ratio.max()))

    def result(self) -> WeightUncertainty | None:
        if not np.isfinite(self.lo):
            return None
        return WeightUncertainty(max(0.0, 1.0 - self.lo), max(0.0, self.hi - 1.0))


def measure_uncertainty(w_hat_history, w_true) -> WeightUncertainty:
    """Tightest (delta_min, delta_max) with 1-delta_min <= w_hat/w <= 1+delta_max.

    ``w_hat_history`` is an iterable of weight arrays from post-initial-phase
    rounds; ``w_true`` broadcasts against each of them and must be nonzero.
    """
    w_true = np.asarray(w_true, dtype=float)
    if w_true.size == 0 or np.any(w_true == 0):
        raise ValueError("true weights must be known and nonzero")
    tracker = UncertaintyTracker()
    for w_hat in w_hat_history:
        tracker.update(w_hat, w_true)
    result = tracker.result()
    if result is None:
        raise ValueError("no rounds to measure")
    return result
