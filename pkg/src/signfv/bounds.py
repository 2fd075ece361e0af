"""Closed-form error exponents and decoding error bounds."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np


class BoundDomainError(ValueError):
    """Raised when a bound is evaluated outside the region where it holds."""


def _probabilities(p, upper=0.5, name="p") -> np.ndarray:
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.size == 0:
        raise BoundDomainError(f"{name} is empty")
    bad = np.flatnonzero(~((arr > 0.0) & (arr < upper)))
    if bad.size:
        raise BoundDomainError(f"{name}[{bad[0]}] = {arr[bad[0]]} outside (0, {upper})")
    return arr


def gamma_wmv(p) -> float:
    """WMV error exponent: mean over workers of 0.5 * ln((1-p)/p) * (1/2 - p)."""
    p = _probabilities(p)
    return float(np.sum(np.log((1.0 - p) / p) * (0.5 - p)) / (2 * p.size))


def wmv_error_bound(p, M: int | None = None) -> float:
    p = _probabilities(p)
    M = p.size if M is None else M
    if M != p.size:
        raise BoundDomainError(f"got {p.size} probabilities for M = {M}")
    return math.exp(-M * gamma_wmv(p))


def asymptotic_exponent_uniform(a: float) -> float:
    """Large-M limit of the WMV exponent when each p ~ Uniform[0, a]."""
    if not 0.0 <= a <= 0.5:
        raise BoundDomainError(f"a must lie in (0, 1/2], got {a}")
    if a == 0.0:
        return math.inf
    return 0.25 * (1.0 + (1.0 - a) * math.log((1.0 - a) / a))


def exponent_summand(p):
    """0.5 * ln((1-p)/p) * (1/2 - p); the per-worker term averaged by the exponent."""
    p = np.asarray(p, dtype=float)
    return 0.5 * np.log((1.0 - p) / p) * (0.5 - p)


def _batches(batches) -> np.ndarray:
    b = np.asarray(batches, dtype=float).ravel()
    if b.size == 0 or np.any(b < 1) or np.any(b != np.floor(b)):
        raise BoundDomainError("batch sizes must be positive integers")
    return b


def geometric_mean_batch(batches) -> float:
    b = _batches(batches)
    return float(np.exp(np.mean(np.log(b))))


def arithmetic_mean_batch(batches) -> float:
    """(mean of B^-1/2)^-2, the batch statistic that governs plain majority vote."""
    b = _batches(batches)
    return float(np.mean(1.0 / np.sqrt(b)) ** -2)


def wmv_bound_batches(batches, sigma: float) -> float:
    b = _batches(batches)
    if not sigma > 0:
        raise BoundDomainError("sigma must be positive")
    implied = sigma / np.sqrt(b)
    bad = np.flatnonzero(implied >= 0.25)
    if bad.size:
        m = int(bad[0])
        raise BoundDomainError(
            f"worker {m}: sigma/sqrt(B) = {implied[m]:.4g} >= 1/4 (B = {int(b[m])}), bound does not apply"
        )
    M = b.size
    return math.exp(-(M / 8.0) * math.log(0.75 * math.sqrt(geometric_mean_batch(b)) / sigma))


def gamma_mv(p_bar: float) -> float:
    if not 0.0 < p_bar < 0.5:
        raise BoundDomainError(f"average cross-over must lie in (0, 1/2), got {p_bar}")
    return p_bar - 0.5 * math.log(2.0 * math.e * p_bar)


def mv_error_bound(p) -> float:
    p = np.atleast_1d(np.asarray(p, dtype=float))
    return math.exp(-p.size * gamma_mv(float(p.mean())))


def mv_bound_batches(batches, sigma: float) -> tuple[float, bool]:
    """Majority-vote bound in terms of batch sizes.

    Returns ``(bound, vacuous)``; the bound is clamped to 1 and flagged vacuous
    when sqrt(B_AM) / (2 e sigma) <= 1.
    """
    b = _batches(batches)
    if not sigma > 0:
        raise BoundDomainError("sigma must be positive")
    ratio = math.sqrt(arithmetic_mean_batch(b)) / (2.0 * math.e * sigma)
    if ratio <= 1.0:
        return 1.0, True
    return math.exp(-(b.size / 2.0) * math.log(ratio)), False


def imperfect_bound(p, M: int | None, delta_min: float, delta_max: float) -> float:
    if not 0.0 <= delta_min < 1.0:
        raise BoundDomainError(f"delta_min must lie in [0, 1), got {delta_min}")
    if delta_max < 0.0:
        raise BoundDomainError(f"delta_max must be nonnegative, got {delta_max}")
    p = _probabilities(p)
    M = p.size if M is None else M
    if M != p.size:
        raise BoundDomainError(f"got {p.size} probabilities for M = {M}")
    return math.exp(-M * ((1.0 - delta_min) / (1.0 + delta_max)) * gamma_wmv(p))


def large_deviation_check(p: float, t):
    """Both sides of (1-p)e^{-tp} + p e^{t(1-p)} <= exp((1-2p) t^2 / (4 ln((1-p)/p))).

    At p = 1/2 the right-hand exponent takes its limit t^2/8.
    """
    if not 0.0 < p < 1.0:
        raise BoundDomainError(f"p must lie in (0, 1), got {p}")
    t = np.asarray(t, dtype=float)
    lhs = (1.0 - p) * np.exp(-t * p) + p * np.exp(t * (1.0 - p))
    if p == 0.5:
        coef = 0.125
    else:
        coef = (1.0 - 2.0 * p) / (4.0 * math.log((1.0 - p) / p))
    rhs = np.exp(coef * t * t)
    if lhs.ndim == 0:
        return float(lhs), float(rhs)
    return lhs, rhs


def theorem1_rate_bound(f1: float, fstar: float, L, T: int, pe_max: float) -> tuple[float, float]:
    """Bound on the time-averaged true-gradient L1 norm and its prescribed step size.

    Returns ``(bound, delta)``.
    """
    if not pe_max < 0.5:
        raise BoundDomainError(f"P_E^max must be below 1/2, got {pe_max}")
    if pe_max < 0:
        raise BoundDomainError("P_E^max must be nonnegative")
    if f1 < fstar:
        raise BoundDomainError(f"f1 = {f1} is below f* = {fstar}")
    L = np.asarray(L, dtype=float)
    if np.any(L < 0):
        raise BoundDomainError("smoothness constants must be nonnegative")
    if T < 1:
        raise BoundDomainError("T must be positive")
    l1 = float(L.sum())
    gap = f1 - fstar
    bound = math.sqrt(2.0 * gap * l1 / T) / (1.0 - 2.0 * pe_max)
    delta = math.sqrt(2.0 * gap / (T * l1)) if l1 > 0 else math.inf
    return bound, delta


@dataclass
class ErrorExponentReport:
    gamma_wmv: float | None
    gamma_mv: float | None
    bound_wmv: float | None
    bound_mv: float | None
    bound_imperfect: float | None
    B_gm: float
    B_am: float
    bound_wmv_batches: float | None = None
    bound_mv_batches: float | None = None
    mv_batches_vacuous: bool | None = None
    notes: list[str] | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def to_text(self) -> str:
        rows = []
        for k, v in asdict(self).items():
            if k == "notes":
                continue
            if isinstance(v, float):
                v = f"{v:.6g}"
            rows.append(f"{k:<20} {'-' if v is None else v}")
        for note in self.notes or []:
            rows.append(f"note: {note}")
        return "\n".join(rows)


def exponent_report(p, batches, sigma: float | None = None, delta_min: float = 0.0, delta_max: float = 0.0) -> ErrorExponentReport:
    """Evaluate every bound that applies; record why the others are skipped."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    notes: list[str] = []

    def attempt(fn, *args):
        try:
            return fn(*args)
        except BoundDomainError as exc:
            notes.append(f"{fn.__name__}: {exc}")
            return None

    g_wmv = attempt(gamma_wmv, p)
    g_mv = attempt(gamma_mv, float(p.mean()))
    report = ErrorExponentReport(
        gamma_wmv=g_wmv,
        gamma_mv=g_mv,
        bound_wmv=None if g_wmv is None else math.exp(-p.size * g_wmv),
        bound_mv=None if g_mv is None else min(1.0, math.exp(-p.size * g_mv)),
        bound_imperfect=attempt(imperfect_bound, p, p.size, delta_min, delta_max),
        B_gm=geometric_mean_batch(batches),
        B_am=arithmetic_mean_batch(batches),
        notes=notes,
    )
    if sigma is not None:
        report.bound_wmv_batches = attempt(wmv_bound_batches, batches, sigma)
        mv = attempt(mv_bound_batches, batches, sigma)
        if mv is not None:
            report.bound_mv_batches, report.mv_batches_vacuous = mv
            if report.mv_batches_vacuous:
                notes.append("mv_bound_batches: vacuous, sqrt(B_AM) <= 2 e sigma")
    return report


def lemma1_sweep(p_values=None, t_values=None) -> dict:
    """Largest lhs/rhs ratio of the large-deviation inequality over a grid.

    Defaults: p in {0.01, ..., 0.49} plus the p = 1/2 limit, t in [-10, 10]
    in steps of 0.05.
    """
    if p_values is None:
        p_values = [k / 100 for k in range(1, 50)] + [0.5]
    if t_values is None:
        t_values = np.arange(-200, 201) * 0.05
    worst = 0.0
    worst_at = None
    for p in p_values:
        lhs, rhs = large_deviation_check(p, t_values)
        ratio = lhs / rhs
        i = int(np.argmax(ratio))
        if ratio[i] > worst:
            worst, worst_at = float(ratio[i]), (p, float(np.asarray(t_values)[i]))
    return {"max_ratio": worst, "at": worst_at, "points": len(p_values) * len(t_values)}
