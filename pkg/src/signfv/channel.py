"""Stochastic sign computation viewed as parallel binary symmetric channels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RngStream, as_signs, hamming_distance, pack


@dataclass(frozen=True)
class BscSpec:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"cross-over probability must lie in [0, 1], got {self.p}")

    @property
    def well_behaved(self) -> bool:
        return self.p < 0.5


class ParallelChannels:
    """M independent BSCs, one per worker."""

    def __init__(self, specs):
        specs = [s if isinstance(s, BscSpec) else BscSpec(float(s)) for s in specs]
        if not specs:
            raise ValueError("need at least one channel")
        self.specs = tuple(specs)
        self.p = np.array([s.p for s in specs], dtype=float)

    def __len__(self) -> int:
        return len(self.specs)

    def __repr__(self) -> str:
        return f"ParallelChannels(p={self.p.tolist()})"


def transmit(truth: int, channel: BscSpec, rng: RngStream, size=None):
    """Send ``truth`` through one BSC. With ``size`` returns that many independent uses."""
    if truth not in (1, -1):
        raise ValueError("truth must be +1 or -1")
    u = rng.random(size)
    out = np.where(u < channel.p, -truth, truth).astype(np.int8)
    return int(out) if size is None else out


def transmit_word(truth: int, channels: ParallelChannels, rng: RngStream, size=None) -> np.ndarray:
    """One received codeword of length M (or ``size`` words stacked as rows)."""
    if truth not in (1, -1):
        raise ValueError("truth must be +1 or -1")
    shape = (len(channels),) if size is None else (size, len(channels))
    u = rng.random(shape)
    return np.where(u < channels.p, -truth, truth).astype(np.int8)


def transmit_signs(truth: np.ndarray, p: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Flip each row of ``truth`` broadcast over workers.

    ``p`` has shape (M,) or (M, N); ``uniforms`` has shape (M, N). Row m of
    the result is worker m's received sign vector.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    return np.where(uniforms < p, -truth[None, :], truth[None, :]).astype(np.int8)


def computing_error_bound(batch: int, sigma: float) -> float:
    """Upper bound on a worker's sign-flip probability, clamped to 1."""
    if batch < 1 or int(batch) != batch:
        raise ValueError(f"batch size must be a positive integer, got {batch}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return min(1.0, sigma / math.sqrt(batch))


def empirical_crossover(truth, observed) -> float:
    truth = as_signs(truth).ravel()
    observed = as_signs(observed).ravel()
    if truth.size != observed.size:
        raise ValueError(f"length mismatch: {truth.size} vs {observed.size}")
    if truth.size == 0:
        raise ValueError("need at least one pair")
    return hamming_distance(pack(truth), pack(observed)) / truth.size


def sample_scales(sigma: float, size, rng: RngStream, dist: str = "gaussian") -> np.ndarray:
    """Per-sample gradient multipliers with mean 1 and variance sigma**2.

    A sample gradient equal to ``scale * g_true`` is unbiased with normalised
    variance exactly ``sigma**2`` in every coordinate.
    """
    if dist == "gaussian":
        xi = rng.normal(size=size)
    elif dist == "rademacher":
        xi = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    elif dist == "uniform":
        xi = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size)
    elif dist == "exponential":
        xi = rng.generator.exponential(1.0, size) - 1.0
    else:
        raise ValueError(f"unknown noise distribution {dist!r}")
    return 1.0 + sigma * xi


def flip_rate(batch: int, sigma: float, trials: int, rng: RngStream, dist: str = "gaussian") -> float:
    """Monte Carlo sign-flip rate of a size-``batch`` mean of noisy gradients.

    The true gradient is taken as +1; a flip happens when the mini-batch
    average of the multipliers is negative.
    """
    flips = 0
    done = 0
    chunk = max(1, 2_000_000 // batch)
    while done < trials:
        k = min(chunk, trials - done)
        scales = sample_scales(sigma, (k, batch), rng, dist)
        flips += int(np.count_nonzero(scales.mean(axis=1) < 0))
        done += k
    return flips / trials
