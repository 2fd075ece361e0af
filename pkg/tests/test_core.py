import numpy as np
import pytest
from hypothesis import given, strategies as st

from signfv.core import RngStream, as_signs, hamming_distance, pack, sign_of, signs, sign_word


@pytest.mark.parametrize("x,expected", [(3.7, 1), (-0.2, -1), (0.0, 1), (-0.0, 1), (1e-300, 1), (-1e-300, -1)])
def test_sign_of(x, expected):
    assert sign_of(x) == expected


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
def test_sign_of_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        sign_of(bad)
    with pytest.raises(ValueError):
        signs([1.0, bad])


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=50))
def test_signs_matches_scalar_rule(values):
    assert signs(values).tolist() == [sign_of(v) for v in values]


def test_pack_examples():
    v = pack([1])
    assert len(v) == 1 and v.unpack().tolist() == [1]
    assert pack([1, -1, -1]).unpack().tolist() == [1, -1, -1]


def test_pack_rejects_bad_input():
    with pytest.raises(ValueError):
        pack([])
    with pytest.raises(ValueError):
        pack([1, 0, -1])


def test_pack_million_round_trip():
    s = np.where(RngStream(5, "pack").random(10**6) < 0.5, -1, 1)
    v = pack(s)
    assert len(v.bits) == 10**6 // 8
    assert np.array_equal(v.unpack(), s)


@given(st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=200))
def test_pack_round_trip_property(values):
    assert pack(values).unpack().tolist() == values


@given(st.lists(st.tuples(st.sampled_from([-1, 1]), st.sampled_from([-1, 1])), min_size=1, max_size=100))
def test_hamming_counts_disagreements(pairs):
    a = [p[0] for p in pairs]
    b = [p[1] for p in pairs]
    assert hamming_distance(pack(a), pack(b)) == sum(x != y for x, y in pairs)


def test_hamming_length_mismatch():
    with pytest.raises(ValueError):
        hamming_distance(pack([1, 1]), pack([1]))


def test_sign_word_validation():
    assert sign_word([1, -1], workers=2).dtype == np.int8
    with pytest.raises(ValueError):
        sign_word([1, -1], workers=3)
    with pytest.raises(ValueError):
        as_signs([2])


def test_rng_streams_reproducible_and_independent():
    a = RngStream(7, "batch", 3, 11).random(5)
    b = RngStream(7, "batch", 3, 11).random(5)
    assert np.array_equal(a, b)
    for other in (RngStream(8, "batch", 3, 11), RngStream(7, "channel", 3, 11),
                  RngStream(7, "batch", 4, 11), RngStream(7, "batch", 3, 12)):
        assert not np.array_equal(a, other.random(5))
