import numpy as np
import pytest

from signfv import kernels
from signfv.core import RngStream

pytest.importorskip("numba")
from signfv.kernels import _numba as nb_k  # noqa: E402  compared directly, whatever backend is active

np_k = kernels.numpy_backend


@pytest.fixture(scope="module")
def data():
    rng = RngStream(21, "kernels")
    words = np.where(rng.random((13, 257)) < 0.4, -1, 1).astype(np.int8)
    weights = rng.uniform(-2.0, 5.0, (13, 257))
    return rng, words, weights


def test_active_backend_reported():
    assert kernels.BACKEND in ("numba", "numpy")
    assert (kernels.numba_backend is None) == (kernels.BACKEND == "numpy")


def test_scores_bit_identical(data):
    _, words, weights = data
    assert np.array_equal(np_k.weighted_scores(words, weights), nb_k.weighted_scores(words, weights))
    assert np.array_equal(np_k.vote_counts(words), nb_k.vote_counts(words))
    s = np_k.weighted_scores(words, weights)
    s[:3] = 0.0
    assert np.array_equal(np_k.decide(s), nb_k.decide(s))


def test_mismatch_counts_identical(data):
    _, words, _ = data
    a = np.zeros(words.shape, dtype=np.int64)
    b = np.zeros(words.shape, dtype=np.int64)
    decided = words[0].copy()
    np_k.count_mismatches(a, words, decided)
    nb_k.count_mismatches(b, words, decided)
    assert np.array_equal(a, b)


def test_monte_carlo_and_enumeration_identical(data):
    rng = data[0]
    for M in (1, 2, 5, 11):
        p = rng.uniform(0.01, 0.49, M)
        w = rng.uniform(0.1, 3.0, M)
        u = rng.random((5000, M))
        truth = np.where(rng.random(5000) < 0.5, -1, 1).astype(np.int8)
        assert np_k.mc_errors(u, p, w, truth) == nb_k.mc_errors(u, p, w, truth)
        assert np_k.enumerate_errors(p, w) == nb_k.enumerate_errors(p, w)


def test_bit_kernels_identical(data):
    _, words, _ = data
    packed = np.packbits(words > 0, axis=1)
    assert np.array_equal(np_k.column_ones(packed, 257), nb_k.column_ones(packed, 257))
    assert np_k.hamming(packed[0], packed[1]) == nb_k.hamming(packed[0], packed[1])
    assert np_k.hamming(packed[0], packed[1]) == int(np.count_nonzero(words[0] != words[1]))


def test_equal_weight_split_vote_ties_exactly():
    words = np.array([[-1], [-1], [-1], [1], [1], [1]], dtype=np.int8)
    w = np.full((6, 1), 43.22697876893905)
    for k in (np_k, nb_k):
        assert k.weighted_scores(words, w)[0] == 0.0
        assert k.decide(k.weighted_scores(words, w))[0] == 1


def test_env_flag_selects_numpy():
    import subprocess
    import sys

    code = "import signfv.kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env={"SIGNFV_DISABLE_NUMBA": "1", "PATH": ""},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_run_csv_identical_across_backends(tmp_path):
    import subprocess
    import sys

    code = (
        "from signfv.config import ExperimentConfig; from signfv.simulate import run;"
        "import sys; sys.stdout.write(run(ExperimentConfig(workers=7, dimension=9, rounds=80, initial_phase=20,"
        " objective='logistic', decoder='fv', batch_mode=4, seed=3)).to_csv())"
    )
    outs = []
    for flag in ("0", "1"):
        r = subprocess.run([sys.executable, "-c", code], env={"SIGNFV_DISABLE_NUMBA": flag, "PATH": ""},
                           capture_output=True, text=True, check=True)
        outs.append(r.stdout)
    assert outs[0] == outs[1] and outs[0].count("\n") == 81
