import itertools

import numpy as np
import pytest

from signfv.core import RngStream
from signfv.objective import (
    LogisticObjective,
    MLPObjective,
    QuadraticObjective,
    apply_update,
    estimate_sigma,
    load_csv_dataset,
    sample_batch,
    shard_indices,
    true_sign_vector,
)


def fd_gradient(f, x, h=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def test_quadratic_gradient_examples():
    obj = QuadraticObjective(np.ones((3, 4)), [2.0, 1.0, 1.0, 1.0], np.zeros(4))
    assert np.array_equal(obj.true_gradient(np.zeros(4)), np.zeros(4))
    assert np.array_equal(obj.true_gradient(np.array([1.0, 0, 0, 0])), [2.0, 0, 0, 0])
    assert obj.fstar == 0.0 and obj.loss(obj.xstar) == 0.0


def test_quadratic_noise_construction():
    obj = QuadraticObjective.generate(6, 500, 0.8, seed=1)
    x = RngStream(1, "x").normal(size=6)
    # full batch equals the true gradient and the normalised variance is sigma^2
    assert np.allclose(obj.stochastic_gradient(x, np.arange(500)), obj.true_gradient(x), rtol=1e-12)
    s = estimate_sigma(obj, x)
    assert s["sigma"] <= 0.8 * (1 + 1e-9)
    assert s["sigma"] == pytest.approx(0.8, rel=1e-6)


def test_quadratic_b1_variance_monte_carlo():
    obj = QuadraticObjective.generate(4, 200, 0.5, seed=2)
    x = obj.xstar + 1.0
    g = obj.true_gradient(x)
    rng = RngStream(2, "b1")
    draws = np.array([obj.stochastic_gradient(x, [int(rng.integers(0, 200))]) for _ in range(20_000)])
    var = np.mean((draws - g) ** 2, axis=0) / g ** 2
    assert np.all(var <= 0.25 * 1.05)


@pytest.fixture(scope="module")
def logistic():
    return LogisticObjective.generate(6, 80, seed=3)


@pytest.fixture(scope="module")
def mlp():
    return MLPObjective.generate(5, 60, seed=4, hidden=4, classes=3)


@pytest.mark.parametrize("name", ["logistic", "mlp"])
def test_gradient_matches_finite_differences(name, request):
    obj = request.getfixturevalue(name)
    rng = RngStream(5, f"fd-{name}")
    worst = 0.0
    for _ in range(100):
        x = obj.initial_point() + rng.normal(scale=0.5, size=obj.dim)
        g = obj.true_gradient(x)
        fd = fd_gradient(obj.loss, x)
        worst = max(worst, np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-3))
    assert worst < 1e-6


@pytest.mark.parametrize("name", ["logistic", "mlp"])
def test_unbiased_over_all_batches(name, request):
    full = request.getfixturevalue(name)
    if name == "logistic":
        obj = LogisticObjective(full.A[:6], full.y[:6], full.l2)
    else:
        obj = MLPObjective(full.X[:6], full.labels[:6], 4, 3, init_seed=4)
    x = obj.initial_point() + RngStream(6, "unb").normal(scale=0.3, size=obj.dim)
    batches = list(itertools.combinations(range(6), 2))
    assert len(batches) == 15
    mean = np.mean([obj.stochastic_gradient(x, np.array(b)) for b in batches], axis=0)
    assert np.allclose(mean, obj.true_gradient(x), rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("name", ["logistic", "mlp"])
def test_per_sample_gradients_average(name, request):
    obj = request.getfixturevalue(name)
    x = obj.initial_point() + 0.1
    idx = np.arange(10)
    assert np.allclose(obj.per_sample_gradients(x, idx).mean(axis=0), obj.stochastic_gradient(x, idx), atol=1e-14)


def test_logistic_constants(logistic):
    # f* is a lower bound on the loss, and L dominates curvature along coordinate axes
    assert logistic.fstar <= logistic.loss(logistic.initial_point())
    x = RngStream(7, "L").normal(size=logistic.dim)
    for n in range(logistic.dim):
        e = np.zeros(logistic.dim)
        e[n] = 1e-4
        curv = (logistic.true_gradient(x + e)[n] - logistic.true_gradient(x)[n]) / 1e-4
        assert curv <= logistic.L[n] * (1 + 1e-6)


def test_logistic_generator_and_validation():
    obj = LogisticObjective.generate(5, 100, seed=8, balance=0.3)
    assert obj.A.shape == (100, 5) and np.all(obj.A[:, -1] == 1.0)
    assert obj.y.mean() == pytest.approx(0.3)
    with pytest.raises(ValueError):
        LogisticObjective(np.ones((2, 2)), [0, 2])


def test_mlp_parameter_layout(mlp):
    assert mlp.dim == 4 * 5 + 4 + 3 * 4 + 3
    W1, b1, W2, b2 = mlp.unflatten(np.arange(mlp.dim, dtype=float))
    assert W1.shape == (4, 5) and b1.shape == (4,) and W2.shape == (3, 4) and b2.shape == (3,)
    with pytest.raises(ValueError):
        MLPObjective(np.ones((2, 2)), [0, 1], 33, 2)


def test_true_sign_vector():
    obj = QuadraticObjective(np.ones((1, 2)), [2.0, 3.0], [0.0, 0.0])
    assert true_sign_vector(obj, obj.xstar).unpack().tolist() == [1, 1]
    assert true_sign_vector(obj, np.array([1.0, -1.0])).unpack().tolist() == [1, -1]


def test_true_signs_match_finite_differences(logistic):
    rng = RngStream(9, "signs")
    for _ in range(20):
        x = rng.normal(size=logistic.dim)
        g = logistic.true_gradient(x)
        fd = fd_gradient(logistic.loss, x)
        keep = np.abs(g) > 1e-6
        assert np.array_equal(np.sign(g[keep]), np.sign(fd[keep]))


def test_apply_update():
    x = np.array([0.3, -1.7, 2.0])
    up = apply_update(x, np.ones(3), 0.1)
    assert np.array_equal(up, x - 0.1)
    d = np.array([1, -1, 1])
    assert np.array_equal(apply_update(apply_update(x, d, 0.125), -d, 0.125), x)
    with pytest.raises(ValueError):
        apply_update(x, np.ones(2), 0.1)


def test_shards_partition_dataset():
    shards = shard_indices(103, 7, seed=1)
    allidx = np.concatenate(shards)
    assert np.array_equal(np.sort(allidx), np.arange(103))
    assert max(s.size for s in shards) - min(s.size for s in shards) <= 1


def test_sample_batch():
    shard = np.arange(10, 30)
    b = sample_batch(shard, 5, RngStream(0, "b"))
    assert b.size == 5 and np.unique(b).size == 5 and set(b) <= set(shard)
    assert np.array_equal(sample_batch(shard, 20, RngStream(0, "b")), shard)
    with pytest.raises(ValueError):
        sample_batch(shard, 21, RngStream(0, "b"))


def test_load_csv(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,label\n1.0,2.0,0\n-1.0,0.5,1\n")
    X, y = load_csv_dataset(path)
    assert X.shape == (2, 2) and y.tolist() == [0, 1]
