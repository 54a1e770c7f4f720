"""Aggregate statistics for paired benchmark trials."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, rankdata


def _positive(values) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("no values")
    if np.any(~(v > 0)):
        raise ValueError("geometric statistics need positive values")
    return v


def geometric_mean(values) -> float:
    return float(np.exp(np.mean(np.log(_positive(values)))))


def multiplicative_se(values) -> float:
    """exp of the standard error of the mean log value."""
    logs = np.log(_positive(values))
    if logs.size < 2:
        return 1.0
    return float(np.exp(np.std(logs, ddof=1) / math.sqrt(logs.size)))


def bootstrap_ci_gm(values, resamples: int = 4000, level: float = 0.95, rng=None) -> tuple[float, float]:
    """Percentile bootstrap interval for the geometric mean."""
    logs = np.log(_positive(values))
    if logs.size < 2 and resamples > 1:
        raise ValueError("bootstrap needs at least 2 values")
    rng = np.random.default_rng(rng)
    idx = rng.integers(0, logs.size, size=(resamples, logs.size))
    gms = np.exp(logs[idx].mean(axis=1))
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(gms, [tail, 1.0 - tail])
    return float(lo), float(hi)


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials and trials >= 1")
    z = float(norm.ppf(0.5 + level / 2.0))
    n = float(trials)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def wilcoxon_signed_rank_onesided(a, b=None) -> float:
    """p-value for H1: a > b (paired), normal approximation.

    Zero differences are dropped, tied magnitudes get midranks with the
    matching variance correction, and a 0.5 continuity correction is applied.
    """
    a = np.asarray(a, dtype=float)
    d = a if b is None else a - np.asarray(b, dtype=float)
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise ValueError("degenerate: all pairs tied")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    mean = n * (n + 1) / 4.0
    _, counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(counts ** 3 - counts)) / 48.0
    if var <= 0:
        raise ValueError("degenerate: zero variance")
    z = (w_plus - mean - 0.5) / math.sqrt(var)
    return float(norm.sf(z))


@dataclass
class PairedSummary:
    n: int
    gm_ratio: float
    ci_lo: float
    ci_hi: float
    mult_se: float
    wins: int
    win_rate: float
    wilson_lo: float
    wilson_hi: float
    p_value: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def paired_summary(a, b, resamples: int = 4000, rng=0) -> PairedSummary:
    """Statistics of r_i = a_i / b_i with wins counted as a_i > b_i."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("paired samples differ in length")
    ratios = a / b
    gm = geometric_mean(ratios)
    lo, hi = bootstrap_ci_gm(ratios, resamples, rng=rng) if ratios.size > 1 else (gm, gm)
    wins = int(np.sum(a > b))
    wlo, whi = wilson_interval(wins, a.size)
    try:
        p = wilcoxon_signed_rank_onesided(np.log(a), np.log(b))
    except ValueError:
        p = None
    return PairedSummary(a.size, gm, lo, hi, multiplicative_se(ratios), wins, wins / a.size, wlo, whi, p)
