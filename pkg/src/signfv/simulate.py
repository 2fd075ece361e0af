"""Synchronous round protocol: workers quantize, the server decodes and broadcasts."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .bounds import theorem1_rate_bound
from .channel import transmit_signs
from .config import ExperimentConfig
from .core import RngStream, pack, signs
from .decode import llr_weight, majority_vote_many, weighted_vote_many
from .estimate import CrossoverState, UncertaintyTracker
from .objective import (
    LogisticObjective,
    MLPObjective,
    Objective,
    QuadraticObjective,
    estimate_sigma,
    load_csv_dataset,
    sample_batch,
    shard_indices,
)

DIVERGENCE_FACTOR = 1e6
CSV_COLUMNS = ("t", "f", "g_l1", "err", "bits_up", "bits_down")
SIGN_KINDS = ("mv", "wmv", "fv", "signgd")


class Divergence(RuntimeError):
    pass


def round_bits(kind: str, M: int, N: int, K: int | None = None) -> tuple[float, float]:
    """(uplink, downlink) bits of one round for each algorithm."""
    if kind in SIGN_KINDS:
        return M * N, M * N
    if kind == "sgd":
        return 32 * M * N, 32 * M * N
    if kind == "topk":
        if K is None or not 1 <= K <= N:
            raise ValueError("Top-K cost needs 1 <= K <= N")
        return M * (32 * K + K * math.log2(N / K)), 32 * M * N
    raise ValueError(f"unknown algorithm kind {kind!r}")


def communication_cost(kind: str, M: int, N: int, T: int, K: int | None = None) -> float:
    if min(M, N, T) < 1:
        raise ValueError("M, N and T must be positive")
    up, down = round_bits(kind, M, N, K)
    return (up + down) * T


@dataclass
class RoundRecord:
    t: int
    f: float
    g_l1: float
    err: float
    err_mv: float
    bits_up: int
    bits_down: int
    wall: float


@dataclass
class RunResult:
    config: ExperimentConfig
    records: list[RoundRecord]
    x: np.ndarray
    worker_models: list[np.ndarray]
    crossover: dict | None
    diverged: bool
    metadata: dict = field(default_factory=dict)
    decisions: list[np.ndarray] | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def mean_error(self, after: int = 0, name: str = "err") -> float:
        errs = [getattr(r, name) for r in self.records if r.t > after]
        return float(np.mean(errs)) if errs else math.nan

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([r.t, repr(r.f), repr(r.g_l1), repr(r.err), r.bits_up, r.bits_down])
        return buf.getvalue()

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "rounds.csv"
        meta_path = out / "metadata.json"
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        meta_path.write_text(json.dumps(self.metadata, indent=2, sort_keys=True, default=_jsonable), encoding="utf-8")
        return csv_path, meta_path


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def build_objective(cfg: ExperimentConfig) -> Objective:
    seed = cfg.dataset_seed
    samples = cfg.dataset_samples
    if cfg.objective == "quadratic":
        return QuadraticObjective.generate(cfg.dimension, samples, cfg.sigma, seed)
    if cfg.csv_path is not None:
        X, y = load_csv_dataset(cfg.csv_path)
        if cfg.objective == "logistic":
            return LogisticObjective.from_arrays(X, y, cfg.l2)
        return MLPObjective(X, y, cfg.hidden, int(y.max()) + 1, init_seed=seed)
    if cfg.objective == "logistic":
        return LogisticObjective.generate(cfg.dimension, samples, seed, cfg.separation, cfg.class_balance, cfg.l2)
    return MLPObjective.generate(cfg.dimension, samples, seed, cfg.hidden, cfg.classes)


def synthetic_crossover(cfg: ExperimentConfig, dim: int) -> np.ndarray:
    """(M, N) matrix of true flip probabilities for the synthetic channel."""
    M = cfg.workers
    if cfg.crossover is not None:
        cs = np.asarray(cfg.crossover, dtype=float).ravel()
        cs = np.broadcast_to(cs if cs.size == M else np.full(M, cs[0]), (M,))
        return np.repeat(cs[:, None], dim, axis=1)
    return RngStream(cfg.seed, "crossover").uniform(0.0, cfg.crossover_max, (M, dim))


def _stack_received(words: np.ndarray) -> np.ndarray:
    # workers send packed sign vectors; the server reads them back
    uplink = [pack(row) for row in words]
    return np.stack([v.unpack() for v in uplink])


def run(cfg: ExperimentConfig, obj: Objective | None = None, keep_decisions: bool = False) -> RunResult:
    """Execute ``cfg.rounds`` synchronous rounds and collect per-round metrics."""
    obj = build_objective(cfg) if obj is None else obj
    M, N, T = cfg.workers, obj.dim, cfg.rounds
    kind = cfg.decoder
    synthetic = cfg.channel == "synthetic"
    batches = cfg.batch_sizes
    seed = cfg.seed

    shards = None
    if not synthetic and kind != "signgd":
        shards = shard_indices(obj.n_samples, M, cfg.dataset_seed)
        for m, (s, b) in enumerate(zip(shards, batches)):
            if b > s.size:
                raise ValueError(f"worker {m}: batch {b} exceeds shard of {s.size} samples")

    x1 = obj.initial_point()
    f1 = obj.loss(x1)
    if cfg.learning_rate == "theorem1":
        _, delta = theorem1_rate_bound(f1, obj.fstar, obj.L, T, 0.0)
    else:
        delta = float(cfg.learning_rate)

    p_true = synthetic_crossover(cfg, N) if synthetic else None
    w_true = None
    if p_true is not None:
        w_true = llr_weight(np.clip(p_true, cfg.clamp_eps, 1.0 - cfg.clamp_eps))
    state = CrossoverState(M, N, cfg.clamp_eps, cfg.pooled_estimates) if kind == "fv" else None
    tracker = UncertaintyTracker() if (kind == "fv" and synthetic) else None
    informative = None if w_true is None else np.abs(w_true) > 0

    models = [x1.copy() for _ in range(M)]
    records: list[RoundRecord] = []
    decisions = [] if keep_decisions else None
    up_bits, down_bits = round_bits(kind, M, N)
    bits_up = bits_down = 0
    diverged = False
    limit = DIVERGENCE_FACTOR * max(abs(f1), 1e-12)
    start = time.perf_counter()

    for t in range(1, T + 1):
        x = models[0]
        f = obj.loss(x)
        if not math.isfinite(f) or f > limit:
            diverged = True
            break
        g = obj.true_gradient(x)
        truth = signs(g)

        grads = None
        mv_decided = None
        if kind == "signgd":
            decided = truth
        else:
            if synthetic:
                u = RngStream(seed, "channel", 0, t).random((M, N))
                words = transmit_signs(truth, p_true, u)
            else:
                words = np.empty((M, N), dtype=np.int8)
                if kind == "sgd":
                    grads = np.empty((M, N))
                for m in range(M):
                    batch = sample_batch(shards[m], batches[m], RngStream(seed, "batch", m, t))
                    gm = obj.stochastic_gradient(models[m], batch)
                    words[m] = signs(gm)
                    if grads is not None:
                        grads[m] = gm
            received = _stack_received(words)
            if kind == "mv" or cfg.track_mv:
                mv_decided, _ = majority_vote_many(received)

            if kind == "mv":
                decided = mv_decided
            elif kind == "wmv":
                if synthetic:
                    weights = w_true
                else:
                    weights = _oracle_weights(obj, models, shards, batches, truth, cfg, t)
                decided, _ = weighted_vote_many(received, weights)
            elif kind == "fv":
                weights = state.current_weights(t, cfg.initial_phase)
                decided, _ = weighted_vote_many(received, weights)
                if tracker is not None and t > cfg.initial_phase:
                    tracker.update(weights[informative], w_true[informative])
                state.record_round(received, decided)
            else:  # sgd
                mean_grad = grads.mean(axis=0)
                decided = signs(mean_grad)

        if kind == "sgd":
            models = [xm - delta * mean_grad for xm in models]
        else:
            downlink = pack(decided)
            step = delta * downlink.unpack()
            models = [xm - step for xm in models]

        bits_up += up_bits
        bits_down += down_bits
        err = float(np.count_nonzero(decided != truth)) / N
        err_mv = math.nan if mv_decided is None else float(np.count_nonzero(mv_decided != truth)) / N
        records.append(RoundRecord(t, f, float(np.abs(g).sum()), err, err_mv, bits_up, bits_down,
                                   time.perf_counter() - start))
        if decisions is not None:
            decisions.append(np.array(decided, copy=True))

    x_final = models[0]
    uncertainty = tracker.result() if tracker is not None else None
    meta = {
        "config": cfg.to_dict(),
        "objective": obj.describe(),
        "backend": kernels.BACKEND,
        "learning_rate": delta,
        "f1": f1,
        "fstar": obj.fstar if obj.kind == "quadratic" else None,
        "L_l1": float(np.sum(obj.L)) if obj.kind != "mlp" else None,
        "diverged": diverged,
        "rounds_completed": len(records),
        "final_loss": obj.loss(x_final) if math.isfinite(obj.loss(x_final)) else None,
        "mean_err_after_initial_phase": _finite_or_none(np.mean([r.err for r in records if r.t > cfg.initial_phase]) if any(r.t > cfg.initial_phase for r in records) else math.nan),
        "bits_total": bits_up + bits_down,
        "delta_min": None if uncertainty is None else uncertainty.delta_min,
        "delta_max": None if uncertainty is None else uncertainty.delta_max,
        "crossover_state": state.snapshot() if state is not None else None,
        "wall_seconds": time.perf_counter() - start,
    }
    if not synthetic:
        meta["sigma_initial"] = estimate_sigma(obj, x1, RngStream(seed, "sigma", 0, 0))
        if math.isfinite(obj.loss(x_final)):
            meta["sigma_final"] = estimate_sigma(obj, x_final, RngStream(seed, "sigma", 0, 1))
    else:
        meta["crossover_true_worker_mean"] = p_true.mean(axis=1).tolist()
    return RunResult(cfg, records, x_final, models, meta["crossover_state"], diverged, meta, decisions)


def _finite_or_none(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _oracle_weights(obj, models, shards, batches, truth, cfg, t):
    """Genie LLR weights for real gradients: flip rates from extra independent batches."""
    M = len(models)
    flips = np.zeros((M, obj.dim))
    for m in range(M):
        rng = RngStream(cfg.seed, "oracle", m, t)
        for _ in range(cfg.oracle_draws):
            batch = sample_batch(shards[m], batches[m], rng)
            flips[m] += signs(obj.stochastic_gradient(models[m], batch)) != truth
    p = np.clip(flips / cfg.oracle_draws, cfg.clamp_eps, 1.0 - cfg.clamp_eps)
    return llr_weight(p)


def run_baseline(cfg: ExperimentConfig, obj: Objective | None = None) -> RunResult:
    if cfg.decoder not in ("signgd", "sgd"):
        raise ValueError("baseline runs use decoder 'signgd' or 'sgd'")
    return run(cfg, obj)


def sweep(base: ExperimentConfig, batch_modes=None, workers=None, decoders=None, seeds=None):
    """Yield (overrides, RunResult) over the Cartesian grid of the given axes."""
    batch_modes = batch_modes or [base.batch_mode]
    workers = workers or [base.workers]
    decoders = decoders or [base.decoder]
    seeds = seeds or [base.seed]
    for mode in batch_modes:
        for M in workers:
            for dec in decoders:
                for s in seeds:
                    over = {"batch_mode": mode, "workers": M, "decoder": dec, "seed": s}
                    cfg = base.replace(batches=None, **over)
                    yield over, run(cfg)


def summarize(over: dict, result: RunResult) -> dict:
    row = dict(over)
    row.update(
        final_loss=result.metadata["final_loss"],
        mean_err=result.metadata["mean_err_after_initial_phase"],
        diverged=result.diverged,
        bits_total=result.metadata["bits_total"],
    )
    return row
