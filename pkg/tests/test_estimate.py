import math
from fractions import Fraction

import numpy as np
import pytest

from signfv.core import RngStream
from signfv.estimate import CrossoverState, WeightUncertainty, measure_uncertainty


def _word(rows):
    return np.array(rows, dtype=np.int8)


def test_never_mismatching_worker_clamps_to_eps():
    st = CrossoverState(1, 1, eps=1e-3)
    for _ in range(10):
        st.record_round(_word([[1]]), np.array([1]))
    assert st.p_hat[0, 0] == 1e-3
    assert st.w_hat[0, 0] == pytest.approx(math.log(0.999 / 0.001), rel=1e-14)


def test_three_in_ten():
    st = CrossoverState(1, 1)
    for t in range(10):
        st.record_round(_word([[-1 if t < 3 else 1]]), np.array([1]))
    assert st.p_hat[0, 0] == pytest.approx(0.3, abs=1e-15)
    assert st.w_hat[0, 0] == pytest.approx(0.8473, abs=1e-4)


def test_alternating_is_uninformative():
    st = CrossoverState(1, 1)
    for t in range(20):
        st.record_round(_word([[1 if t % 2 else -1]]), np.array([1]))
    assert st.p_hat[0, 0] == 0.5
    assert st.w_hat[0, 0] == 0.0


def test_phase_switch():
    st = CrossoverState(2, 3)
    for _ in range(5):
        st.record_round(_word([[1, 1, -1], [-1, 1, 1]]), np.array([1, 1, 1]))
    assert np.array_equal(st.current_weights(1, 100), np.ones((2, 3)))
    assert np.array_equal(st.current_weights(100, 100), np.ones((2, 3)))
    assert np.array_equal(st.current_weights(101, 100), st.w_hat)
    with pytest.raises(ValueError):
        st.current_weights(0, 10)


def test_matches_rational_recursion():
    # independent oracle: exact running average p_t = ((t-1) p_{t-1} + mismatch_t) / t
    M, N, T, eps = 3, 4, 25, Fraction(1, 1000)
    rng = RngStream(2, "est")
    st = CrossoverState(M, N, eps=float(eps))
    p = [[Fraction(0)] * N for _ in range(M)]
    for t in range(1, T + 1):
        words = np.where(rng.random((M, N)) < 0.3, -1, 1).astype(np.int8)
        decoded = np.where(rng.random(N) < 0.5, -1, 1).astype(np.int8)
        st.record_round(words, decoded)
        for m in range(M):
            for n in range(N):
                p[m][n] = ((t - 1) * p[m][n] + int(words[m, n] != decoded[n])) / t
        want = np.array([[float(min(max(v, eps), 1 - eps)) for v in row] for row in p])
        assert np.array_equal(st.p_hat, want)


def test_pooled_mode_averages_coordinates():
    st = CrossoverState(2, 4, pooled=True)
    st.record_round(_word([[1, -1, 1, 1], [-1, -1, 1, 1]]), np.array([1, 1, 1, 1]))
    assert np.allclose(st.p_hat[0], 0.25) and np.allclose(st.p_hat[1], 0.5)


def test_more_reliable_worker_gets_larger_weight():
    rng = RngStream(3, "order")
    p = np.array([0.05, 0.2, 0.4])
    st = CrossoverState(3, 50)
    for _ in range(400):
        truth = np.ones(50, dtype=np.int8)
        words = np.where(rng.random((3, 50)) < p[:, None], -1, 1).astype(np.int8)
        st.record_round(words, truth)
    w = st.w_hat.mean(axis=1)
    assert w[0] > w[1] > w[2] > 0


def test_shape_checks():
    st = CrossoverState(2, 3)
    with pytest.raises(ValueError):
        st.record_round(np.ones((3, 3), dtype=np.int8), np.ones(3))
    with pytest.raises(ValueError):
        CrossoverState(2, 3, eps=0.0)


def test_measure_uncertainty():
    w = np.array([[1.0, 2.0], [0.5, 3.0]])
    assert measure_uncertainty([w, w], w) == WeightUncertainty(0.0, 0.0)
    u = measure_uncertainty([1.1 * w], w)
    assert u.delta_min == 0.0 and u.delta_max == pytest.approx(0.1)
    u = measure_uncertainty([0.8 * w, 1.25 * w], w)
    assert u.delta_min == pytest.approx(0.2) and u.delta_max == pytest.approx(0.25)
    assert u.factor == pytest.approx(0.8 / 1.25)
    with pytest.raises(ValueError):
        measure_uncertainty([], w)
