"""Compiled kernels. Same contracts and summation order as ``_numpy``.

Vote scores are accumulated as two one-sided masses (weights of +1 votes and
of -1 votes) and compared, so equal weights on a split vote tie exactly.
"""

import numpy as np
from numba import njit

_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


@njit(cache=True, nogil=True)
def weighted_scores(words, weights):
    M, N = words.shape
    score = np.empty(N)
    for n in range(N):
        pos = 0.0
        neg = 0.0
        for m in range(M):
            if words[m, n] > 0:
                pos += weights[m, n]
                neg += 0.0
            else:
                pos += 0.0
                neg += weights[m, n]
        score[n] = pos - neg
    return score


@njit(cache=True, nogil=True)
def vote_counts(words):
    M, N = words.shape
    out = np.zeros(N, dtype=np.int64)
    for m in range(M):
        for n in range(N):
            out[n] += words[m, n]
    return out


@njit(cache=True, nogil=True)
def decide(scores):
    out = np.empty(scores.shape[0], dtype=np.int8)
    for n in range(scores.shape[0]):
        out[n] = 1 if scores[n] >= 0 else -1
    return out


@njit(cache=True, nogil=True)
def count_mismatches(counts, words, decided):
    M, N = words.shape
    for m in range(M):
        for n in range(N):
            if words[m, n] != decided[n]:
                counts[m, n] += 1


@njit(cache=True, nogil=True)
def mc_errors(uniforms, p, w, truth):
    trials, M = uniforms.shape
    errors = 0
    for i in range(trials):
        pos = 0.0
        neg = 0.0
        for m in range(M):
            y = -truth[i] if uniforms[i, m] < p[m] else truth[i]
            if y > 0:
                pos += w[m]
                neg += 0.0
            else:
                pos += 0.0
                neg += w[m]
        d = 1 if pos >= neg else -1
        if d != truth[i]:
            errors += 1
    return errors


@njit(cache=True, nogil=True)
def enumerate_errors(p, w):
    M = p.shape[0]
    err_plus = 0.0
    err_minus = 0.0
    for idx in range(1 << M):
        prob = 1.0
        agree = 0.0
        flip = 0.0
        for m in range(M):
            if (idx >> m) & 1:
                prob = prob * p[m]
                agree += 0.0
                flip += w[m]
            else:
                prob = prob * (1.0 - p[m])
                agree += w[m]
                flip += 0.0
        # truth +1 errs when the flipped mass wins; truth -1 errs unless it strictly wins
        err_plus += prob if agree < flip else 0.0
        err_minus += prob if flip >= agree else 0.0
    return err_plus, err_minus


@njit(cache=True, nogil=True)
def column_ones(packed, n):
    rows = packed.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for r in range(rows):
        for j in range(n):
            out[j] += (packed[r, j >> 3] >> (7 - (j & 7))) & 1
    return out


@njit(cache=True, nogil=True)
def _hamming(a, b, table):
    total = 0
    for i in range(a.shape[0]):
        total += table[a[i] ^ b[i]]
    return total


def hamming(a, b):
    return int(_hamming(a.ravel(), b.ravel(), _POPCOUNT8))
