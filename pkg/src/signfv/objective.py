"""Desk-scale training objectives with exact full-data and mini-batch gradients."""

from __future__ import annotations

import csv
import math
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import optimize
from scipy.special import expit, log_softmax, softmax

from .core import RngStream, SignVector, pack, signs

SIGMA_THRESHOLD = 1e-6


class Objective:
    """Empirical loss over a fixed dataset of ``n_samples`` points.

    Subclasses provide ``loss``, ``per_sample_gradients`` and
    ``stochastic_gradient``; the full-data gradient is the mini-batch gradient
    over every sample, so a full batch reproduces it exactly.
    """

    kind = "base"

    def __init__(self, n_samples: int, dim: int):
        self.n_samples = int(n_samples)
        self.dim = int(dim)
        self._all = np.arange(self.n_samples)

    def loss(self, x):
        raise NotImplementedError

    def stochastic_gradient(self, x, batch):
        raise NotImplementedError

    def per_sample_gradients(self, x, batch):
        raise NotImplementedError

    def true_gradient(self, x):
        return self.stochastic_gradient(x, self._all)

    def initial_point(self):
        return np.zeros(self.dim)

    @property
    def L(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def fstar(self) -> float:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind, "dimension": self.dim, "samples": self.n_samples}


def _check_batch(batch):
    batch = np.asarray(batch)
    if batch.size == 0:
        raise ValueError("mini-batch must be nonempty")
    return batch


class QuadraticObjective(Objective):
    """f(x) = sum_n L_n/2 (x_n - x*_n)^2 built from per-sample multipliers.

    Sample i contributes ``c[i, n] * base_L[n]/2 * (x_n - x*_n)^2``; the
    multipliers have column mean ~1 and column variance sigma^2, so the
    stochastic gradient is unbiased with normalised variance sigma^2 at every x.
    """

    kind = "quadratic"

    def __init__(self, scales, base_L, xstar, sigma: float | None = None):
        scales = np.asarray(scales, dtype=float)
        super().__init__(scales.shape[0], scales.shape[1])
        self.scales = scales
        self.base_L = np.asarray(base_L, dtype=float)
        self.xstar = np.asarray(xstar, dtype=float)
        self.sigma = sigma
        self._cbar = scales.mean(axis=0)

    @classmethod
    def generate(cls, dim: int, samples: int, sigma: float, seed: int, L=None, xstar=None):
        rng = RngStream(seed, "dataset")
        if sigma > 0:
            xi = rng.normal(size=(samples, dim))
            xi -= xi.mean(axis=0)
            xi /= xi.std(axis=0)
            scales = 1.0 + sigma * xi
        else:
            scales = np.ones((samples, dim))
        base_L = rng.uniform(0.5, 2.0, dim) if L is None else np.broadcast_to(np.asarray(L, dtype=float), (dim,)).copy()
        xs = rng.normal(size=dim) if xstar is None else np.broadcast_to(np.asarray(xstar, dtype=float), (dim,)).copy()
        return cls(scales, base_L, xs, sigma)

    @property
    def L(self):
        return self.base_L * self._cbar

    @property
    def fstar(self):
        return 0.0

    def loss(self, x):
        d = np.asarray(x) - self.xstar
        return float(np.sum(0.5 * self.L * d * d))

    def _core_grad(self, x):
        return self.base_L * (np.asarray(x) - self.xstar)

    def stochastic_gradient(self, x, batch):
        batch = _check_batch(batch)
        return self.scales[batch].mean(axis=0) * self._core_grad(x)

    def true_gradient(self, x):
        return self._cbar * self._core_grad(x)

    def per_sample_gradients(self, x, batch):
        return self.scales[np.asarray(batch)] * self._core_grad(x)

    def describe(self):
        out = super().describe()
        out["sigma"] = self.sigma
        return out


class LogisticObjective(Objective):
    """Binary logistic regression; the last feature column is the constant 1 bias."""

    kind = "logistic"

    def __init__(self, features, labels, l2: float = 0.0):
        features = np.ascontiguousarray(features, dtype=float)
        super().__init__(features.shape[0], features.shape[1])
        self.A = features
        self.y = np.asarray(labels, dtype=float)
        if not np.all((self.y == 0) | (self.y == 1)):
            raise ValueError("logistic labels must be 0 or 1")
        self.l2 = float(l2)

    @classmethod
    def generate(cls, dim: int, samples: int, seed: int, separation: float = 3.0, balance: float = 0.5, l2: float = 1e-3):
        """Two unit-variance Gaussian blobs in dim-1 features plus a bias column.

        The class centres differ along a random +/-1 direction, so every
        feature carries signal.
        """
        if dim < 2:
            raise ValueError("logistic objective needs dimension >= 2 (features + bias)")
        rng = RngStream(seed, "dataset")
        n_pos = int(round(balance * samples))
        y = np.zeros(samples)
        y[:n_pos] = 1.0
        y = y[rng.permutation(samples)]
        direction = np.where(rng.random(dim - 1) < 0.5, -1.0, 1.0) / math.sqrt(dim - 1)
        centers = np.where(y[:, None] > 0, 0.5, -0.5) * separation * direction
        X = centers + rng.normal(size=(samples, dim - 1))
        A = np.hstack([X, np.ones((samples, 1))])
        return cls(A, y, l2)

    @classmethod
    def from_arrays(cls, X, y, l2: float = 1e-3):
        X = np.asarray(X, dtype=float)
        return cls(np.hstack([X, np.ones((X.shape[0], 1))]), y, l2)

    def loss(self, x):
        z = self.A @ x
        return float(np.mean(np.logaddexp(0.0, z) - self.y * z) + 0.5 * self.l2 * np.dot(x, x))

    def stochastic_gradient(self, x, batch):
        batch = _check_batch(batch)
        A = self.A[batch]
        r = expit(A @ x) - self.y[batch]
        return A.T @ r / batch.size + self.l2 * x

    def per_sample_gradients(self, x, batch):
        A = self.A[np.asarray(batch)]
        r = expit(A @ x) - self.y[np.asarray(batch)]
        return A * r[:, None] + self.l2 * x

    @cached_property
    def L(self):
        # Hessian <= A^T A / (4S) + l2 I; row abs sums bound each coordinate's curvature
        H = self.A.T @ self.A / (4.0 * self.n_samples)
        return np.abs(H).sum(axis=1) + self.l2

    @cached_property
    def fstar(self):
        res = optimize.minimize(
            self.loss, self.initial_point(), jac=self.true_gradient, method="L-BFGS-B",
            options={"maxiter": 5000, "gtol": 1e-12, "ftol": 1e-15},
        )
        return float(res.fun)

    def describe(self):
        out = super().describe()
        out["l2"] = self.l2
        out["positive_fraction"] = float(self.y.mean())
        return out


class MLPObjective(Objective):
    """One tanh hidden layer with softmax cross-entropy.

    Parameters are flattened as [W1 (H x F), b1 (H), W2 (K x H), b2 (K)].
    """

    kind = "mlp"

    def __init__(self, features, labels, hidden: int, classes: int, init_seed: int = 0):
        features = np.ascontiguousarray(features, dtype=float)
        F = features.shape[1]
        if hidden > 32:
            raise ValueError("hidden layer limited to 32 units")
        super().__init__(features.shape[0], hidden * F + hidden + classes * hidden + classes)
        self.X = features
        self.labels = np.asarray(labels, dtype=np.int64)
        self.F, self.H, self.K = F, int(hidden), int(classes)
        self.onehot = np.eye(self.K)[self.labels]
        self.init_seed = init_seed

    @classmethod
    def generate(cls, features: int, samples: int, seed: int, hidden: int = 8, classes: int = 4, noise: float = 0.8):
        """Noisy copies of random +/-1 'glyph' prototypes, one per class."""
        rng = RngStream(seed, "dataset")
        protos = np.where(rng.random((classes, features)) < 0.5, -1.0, 1.0)
        labels = np.arange(samples) % classes
        labels = labels[rng.permutation(samples)]
        X = protos[labels] + noise * rng.normal(size=(samples, features))
        return cls(X, labels, hidden, classes, init_seed=seed)

    def unflatten(self, x):
        H, F, K = self.H, self.F, self.K
        i = 0
        W1 = x[i:i + H * F].reshape(H, F); i += H * F
        b1 = x[i:i + H]; i += H
        W2 = x[i:i + K * H].reshape(K, H); i += K * H
        b2 = x[i:i + K]
        return W1, b1, W2, b2

    def initial_point(self):
        rng = RngStream(self.init_seed, "mlp-init")
        W1 = rng.normal(scale=1.0 / math.sqrt(self.F), size=(self.H, self.F))
        W2 = rng.normal(scale=1.0 / math.sqrt(self.H), size=(self.K, self.H))
        return np.concatenate([W1.ravel(), np.zeros(self.H), W2.ravel(), np.zeros(self.K)])

    def _forward(self, x, X):
        W1, b1, W2, b2 = self.unflatten(x)
        h = np.tanh(X @ W1.T + b1)
        return h, h @ W2.T + b2

    def loss(self, x):
        _, logits = self._forward(x, self.X)
        return float(-np.mean(np.sum(self.onehot * log_softmax(logits, axis=1), axis=1)))

    def _backward(self, x, batch):
        X = self.X[batch]
        h, logits = self._forward(x, X)
        dlogits = softmax(logits, axis=1) - self.onehot[batch]
        _, _, W2, _ = self.unflatten(x)
        dpre = (dlogits @ W2) * (1.0 - h * h)
        return X, h, dlogits, dpre

    def stochastic_gradient(self, x, batch):
        batch = _check_batch(batch)
        X, h, dlogits, dpre = self._backward(x, batch)
        B = batch.size
        return np.concatenate([
            (dpre.T @ X).ravel() / B, dpre.sum(axis=0) / B,
            (dlogits.T @ h).ravel() / B, dlogits.sum(axis=0) / B,
        ])

    def per_sample_gradients(self, x, batch):
        batch = np.asarray(batch)
        X, h, dlogits, dpre = self._backward(x, batch)
        B = batch.size
        return np.concatenate([
            np.einsum("bh,bf->bhf", dpre, X).reshape(B, -1), dpre,
            np.einsum("bk,bh->bkh", dlogits, h).reshape(B, -1), dlogits,
        ], axis=1)

    @cached_property
    def L(self):
        """Estimated coordinate smoothness: max row-abs-sum of a finite-difference Hessian."""
        rng = RngStream(self.init_seed, "mlp-smoothness")
        x0 = self.initial_point()
        best = np.zeros(self.dim)
        eps = 1e-5
        for k in range(3):
            x = x0 + (0.0 if k == 0 else rng.normal(scale=0.5, size=self.dim))
            Hm = np.empty((self.dim, self.dim))
            for j in range(self.dim):
                e = np.zeros(self.dim)
                e[j] = eps
                Hm[j] = (self.true_gradient(x + e) - self.true_gradient(x - e)) / (2 * eps)
            best = np.maximum(best, np.abs(0.5 * (Hm + Hm.T)).sum(axis=1))
        return best

    @cached_property
    def fstar(self):
        res = optimize.minimize(
            self.loss, self.initial_point(), jac=self.true_gradient, method="L-BFGS-B",
            options={"maxiter": 5000, "gtol": 1e-10},
        )
        return float(res.fun)

    def describe(self):
        out = super().describe()
        out.update(features=self.F, hidden=self.H, classes=self.K)
        return out


def load_csv_dataset(path):
    """Read a CSV with a header: feature columns followed by an integer label."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    if len(header) < 2:
        raise ValueError("CSV needs at least one feature column and a label column")
    data = np.array(rows, dtype=float)
    labels = data[:, -1]
    if np.any(labels != np.round(labels)):
        raise ValueError("CSV labels must be integers")
    return data[:, :-1], labels.astype(np.int64)


def true_sign_vector(obj: Objective, x) -> SignVector:
    return pack(signs(obj.true_gradient(x)))


def apply_update(x, decision, delta: float):
    x = np.asarray(x, dtype=float)
    decision = np.asarray(decision)
    if decision.shape != x.shape:
        raise ValueError(f"decision shape {decision.shape} does not match model {x.shape}")
    if not delta > 0:
        raise ValueError("learning rate must be positive")
    return x - delta * decision


def shard_indices(n_samples: int, workers: int, seed: int) -> list[np.ndarray]:
    """IID split of a shuffled dataset into ``workers`` near-equal disjoint shards."""
    perm = RngStream(seed, "shards").permutation(n_samples)
    return [np.sort(s) for s in np.array_split(perm, workers)]


def sample_batch(shard: np.ndarray, size: int, rng: RngStream) -> np.ndarray:
    """Draw ``size`` distinct indices from a worker's shard."""
    if size < 1:
        raise ValueError("batch size must be positive")
    if size > shard.size:
        raise ValueError(f"batch of {size} exceeds shard of {shard.size}")
    if size == shard.size:
        return shard
    return shard[rng.choice(shard.size, size, replace=False)]


def estimate_sigma(obj: Objective, x, rng: RngStream | None = None, max_samples: int = 4096,
                   threshold: float = SIGMA_THRESHOLD) -> dict:
    """Empirical normalised-variance constant at ``x``.

    Uses every sample when the dataset is small enough, otherwise a random
    subset. Coordinates with |true gradient| <= threshold are excluded.
    """
    g = obj.true_gradient(x)
    if obj.n_samples <= max_samples or rng is None:
        idx = obj._all
    else:
        idx = rng.choice(obj.n_samples, max_samples, replace=False)
    G = obj.per_sample_gradients(x, idx)
    keep = np.abs(g) > threshold
    excluded = int(np.count_nonzero(~keep))
    if not np.any(keep):
        return {"sigma": None, "excluded": excluded}
    ratio = np.mean((G[:, keep] - g[keep]) ** 2, axis=0) / g[keep] ** 2
    return {"sigma": float(math.sqrt(ratio.max())), "sigma_median": float(math.sqrt(np.median(ratio))), "excluded": excluded}
