"""Monte Carlo checks of the analytic decoding-error bounds."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .bounds import asymptotic_exponent_uniform, exponent_summand, imperfect_bound, wmv_error_bound
from .channel import ParallelChannels
from .core import RngStream
from .decode import decode_error_probability_exact, llr_weight

HOLDS = "holds"
VACUOUS = "holds-vacuously"
VIOLATED = "violated"

EXACT_MAX_WORKERS = 11
DEFAULT_TRIALS = 100_000


@dataclass
class BoundCheck:
    config: dict
    trials: int
    errors: int
    empirical: float
    sigma3: float
    bound: float
    verdict: str
    exact: float | None = None
    exact_agrees: bool | None = None

    @property
    def passed(self) -> bool:
        return self.verdict != VIOLATED


def three_sigma(rate: float, trials: int) -> float:
    return 3.0 * math.sqrt(max(rate * (1.0 - rate), 0.0) / trials)


def verdict(empirical: float, sigma3: float, bound: float) -> str:
    if empirical - sigma3 > bound:
        return VIOLATED
    if bound >= 1.0:
        return VACUOUS
    return HOLDS


def sample_configs(count: int, seed: int, workers=(2, 15), p_range=(0.01, 0.49)) -> list[np.ndarray]:
    """Random cross-over vectors: M uniform in the inclusive ``workers`` range."""
    rng = RngStream(seed, "mc-configs")
    lo, hi = workers
    out = []
    for _ in range(count):
        M = int(rng.integers(lo, hi + 1))
        out.append(rng.uniform(p_range[0], p_range[1], M))
    return out


def simulate_errors(p: np.ndarray, weights: np.ndarray, trials: int, seed: int, index: int) -> int:
    """Decode ``trials`` random codewords (random truth bit each) and count errors."""
    p = np.ascontiguousarray(p, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    u = RngStream(seed, "mc-channel", 0, index).random((trials, p.size))
    truth = np.where(RngStream(seed, "mc-truth", 0, index).random(trials) < 0.5, -1, 1).astype(np.int8)
    return int(kernels.mc_errors(u, p, weights, truth))


def _check(p, weights, bound, trials, seed, index, extra=None) -> BoundCheck:
    errors = simulate_errors(p, weights, trials, seed, index)
    emp = errors / trials
    s3 = three_sigma(emp, trials)
    cfg = {"M": int(p.size), "p": p.tolist()}
    if extra:
        cfg.update(extra)
    check = BoundCheck(cfg, trials, errors, emp, s3, bound, verdict(emp, s3, bound))
    if p.size <= EXACT_MAX_WORKERS:
        ex = decode_error_probability_exact(ParallelChannels(p), weights).average
        check.exact = ex
        check.exact_agrees = abs(emp - ex) <= three_sigma(ex, trials)
    return check


def verify_wmv_bound(trials: int = DEFAULT_TRIALS, configs=None, count: int = 100, seed: int = 0) -> list[BoundCheck]:
    """Empirical error of LLR-weighted voting against exp(-M gamma) per configuration."""
    if trials < 10_000:
        raise ValueError("use at least 10^4 trials per configuration")
    configs = sample_configs(count, seed) if configs is None else [np.asarray(c, dtype=float) for c in configs]
    checks = []
    for i, p in enumerate(configs):
        w = llr_weight(p)
        checks.append(_check(p, w, wmv_error_bound(p), trials, seed, i))
    return checks


def perturbed_weights(p: np.ndarray, delta_min: float, delta_max: float, seed: int, index: int) -> np.ndarray:
    """LLR weights scaled by independent factors drawn from [1-delta_min, 1+delta_max]."""
    factors = RngStream(seed, "mc-perturb", 0, index).uniform(1.0 - delta_min, 1.0 + delta_max, p.size)
    return llr_weight(p) * factors


def verify_imperfect_bound(trials: int = DEFAULT_TRIALS, delta_min: float = 0.2, delta_max: float = 0.2,
                           configs=None, count: int = 100, seed: int = 0) -> list[BoundCheck]:
    """Like :func:`verify_wmv_bound`, with weights perturbed within the uncertainty band.

    Channel draws use the same streams as the perfect-weight check, so zero
    perturbation reproduces it exactly.
    """
    if trials < 10_000:
        raise ValueError("use at least 10^4 trials per configuration")
    configs = sample_configs(count, seed) if configs is None else [np.asarray(c, dtype=float) for c in configs]
    checks = []
    for i, p in enumerate(configs):
        w = perturbed_weights(p, delta_min, delta_max, seed, i)
        bound = imperfect_bound(p, p.size, delta_min, delta_max) if delta_min < 1.0 else 1.0
        checks.append(_check(p, w, bound, trials, seed, i, {"delta_min": delta_min, "delta_max": delta_max}))
    return checks


@dataclass
class Corollary1Check:
    a: float
    closed_form: float
    sample_mean: float
    sigma3: float
    samples: int
    agrees: bool = field(init=False)

    def __post_init__(self):
        self.agrees = abs(self.sample_mean - self.closed_form) <= self.sigma3


def verify_corollary1(a_values=(0.1, 0.25, 0.5), samples: int = 1_000_000, seed: int = 0) -> list[Corollary1Check]:
    """Sample mean of the exponent summand over p ~ U[0, a] against the closed-form limit."""
    out = []
    for i, a in enumerate(a_values):
        p = RngStream(seed, "mc-corollary1", 0, i).uniform(0.0, a, samples)
        # p == 0 has probability zero but would make the summand infinite
        p = p[p > 0.0]
        vals = exponent_summand(p)
        s3 = 3.0 * vals.std(ddof=1) / math.sqrt(vals.size)
        out.append(Corollary1Check(a, asymptotic_exponent_uniform(a), float(vals.mean()), float(s3), int(vals.size)))
    return out


def summarize(checks: list[BoundCheck]) -> dict:
    counts = {HOLDS: 0, VACUOUS: 0, VIOLATED: 0}
    for c in checks:
        counts[c.verdict] += 1
    disagreements = sum(1 for c in checks if c.exact_agrees is False)
    return {"checks": len(checks), **counts, "exact_disagreements": disagreements}


def format_table(checks: list[BoundCheck], title: str) -> str:
    lines = [title, f"{'#':>3} {'M':>3} {'empirical':>10} {'3sigma':>9} {'bound':>9} {'exact':>10}  verdict"]
    for i, c in enumerate(checks):
        ex = "-" if c.exact is None else f"{c.exact:.3e}"
        lines.append(f"{i:>3} {c.config['M']:>3} {c.empirical:>10.3e} {c.sigma3:>9.2e} {c.bound:>9.3e} {ex:>10}  {c.verdict}")
    s = summarize(checks)
    lines.append(f"{s['checks']} checks: {s[HOLDS]} hold, {s[VACUOUS]} vacuous, {s[VIOLATED]} violated")
    return "\n".join(lines)


def to_json(**groups) -> str:
    payload = {}
    for name, items in groups.items():
        payload[name] = [asdict(c) for c in items]
    return json.dumps(payload, indent=2)


def verify_lemma2(batches=(1, 4, 16, 64, 256), sigmas=(0.25, 0.5, 1.0), trials: int = 200_000,
                  seed: int = 0, dist: str = "gaussian") -> list[BoundCheck]:
    """Sign-flip rate of mini-batch means of unbiased noisy gradients against sigma/sqrt(B)."""
    from .channel import computing_error_bound, flip_rate

    checks = []
    for i, B in enumerate(batches):
        for j, s in enumerate(sigmas):
            rate = flip_rate(B, s, trials, RngStream(seed, f"mc-lemma2-{dist}", i, j), dist)
            s3 = three_sigma(rate, trials)
            bound = computing_error_bound(B, s)
            checks.append(BoundCheck({"B": B, "sigma": s, "dist": dist, "M": 1}, trials, round(rate * trials),
                                     rate, s3, bound, verdict(rate, s3, bound)))
    return checks
