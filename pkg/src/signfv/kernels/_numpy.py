"""Pure-numpy kernels.

Every reduction over workers is written as an explicit sequential loop so the
floating-point summation order matches the compiled kernels exactly. Vote
scores are the difference of two one-sided masses, which makes equal weights
on a split vote an exact tie.
"""

import numpy as np


def weighted_scores(words, weights):
    """Per-coordinate sum over workers of ``weights[m, n] * words[m, n]``."""
    M = words.shape[0]
    pos = np.zeros(words.shape[1])
    neg = np.zeros(words.shape[1])
    for m in range(M):
        up = words[m] > 0
        pos = pos + np.where(up, weights[m], 0.0)
        neg = neg + np.where(up, 0.0, weights[m])
    return pos - neg


def vote_counts(words):
    return words.sum(axis=0, dtype=np.int64)


def decide(scores):
    return np.where(scores >= 0, 1, -1).astype(np.int8)


def count_mismatches(counts, words, decided):
    counts += words != decided[None, :]


def mc_errors(uniforms, p, w, truth):
    """Count decoding errors over Monte Carlo trials.

    ``uniforms`` has shape (trials, M); worker m flips the truth bit when its
    uniform draw falls below ``p[m]``.
    """
    trials, M = uniforms.shape
    pos = np.zeros(trials)
    neg = np.zeros(trials)
    for m in range(M):
        up = np.where(uniforms[:, m] < p[m], -truth, truth) > 0
        pos = pos + np.where(up, w[m], 0.0)
        neg = neg + np.where(up, 0.0, w[m])
    decided = np.where(pos >= neg, 1, -1)
    return int(np.count_nonzero(decided != truth))


def enumerate_errors(p, w):
    """Exact error probabilities under truth=+1 and truth=-1.

    Enumerates all 2^M flip patterns; pattern bit m set means worker m flipped.
    """
    M = p.shape[0]
    idx = np.arange(1 << M, dtype=np.int64)
    prob = np.ones(1 << M)
    agree = np.zeros(1 << M)
    flip = np.zeros(1 << M)
    for m in range(M):
        z = (idx >> m) & 1
        prob = prob * np.where(z == 1, p[m], 1.0 - p[m])
        agree = agree + np.where(z == 1, 0.0, w[m])
        flip = flip + np.where(z == 1, w[m], 0.0)
    # truth +1 errs when the flipped mass wins; truth -1 errs unless it strictly wins
    # cumsum is a sequential sum, matching the compiled loop bit for bit
    err_plus = np.cumsum(np.where(agree < flip, prob, 0.0))[-1]
    err_minus = np.cumsum(np.where(flip >= agree, prob, 0.0))[-1]
    return float(err_plus), float(err_minus)


def column_ones(packed, n):
    """Number of set bits in each of the first ``n`` bit positions across rows."""
    bits = np.unpackbits(packed, axis=1, count=n)
    return bits.sum(axis=0, dtype=np.int64)


def hamming(a, b):
    return int(np.bitwise_count(np.bitwise_xor(a, b)).sum())
