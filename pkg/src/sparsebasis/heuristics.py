"""Alternative truncation rules and fidelity estimators built on gamma^2."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .state import SparseState, TruncationEvent, apply_selection, select_topk


def schmidt_sector(x, c: int):
    """Right-partition configuration floor(x / 2**c) on qubits c..N-1."""
    if isinstance(x, np.ndarray):
        return x >> np.uint64(c)
    return int(x) >> c


def sector_counts(keys: np.ndarray, c: int) -> np.ndarray:
    """For each key, how many stored keys share its sector at cut c."""
    _, inv, counts = np.unique(keys >> np.uint64(c), return_inverse=True, return_counts=True)
    return counts[inv.ravel()]


def _select_by_score(state: SparseState, k: int, score: np.ndarray) -> TruncationEvent:
    if k < 1:
        raise ValueError("invalid budget")
    return apply_selection(state, select_topk(score, k))


def truncate_schmidt1(state: SparseState, k: int) -> TruncationEvent:
    """Keep the k best of p / C_{N/2}; p is the probability, C the sector count."""
    if k < 1:
        raise ValueError("invalid budget")
    if state.support <= k:
        return apply_selection(state, np.ones(state.support, dtype=bool))
    p = state.probabilities()
    c = sector_counts(state.keys, state.n_qubits // 2)
    return _select_by_score(state, k, p / c)


def schmidt3_cuts(n_qubits: int) -> tuple[int, int, int]:
    return n_qubits // 4, n_qubits // 2, (3 * n_qubits) // 4


def truncate_schmidt3(state: SparseState, k: int) -> TruncationEvent:
    """Keep the k best of p / (C_{N/4} C_{N/2} C_{3N/4})^(1/3), cuts floored."""
    if k < 1:
        raise ValueError("invalid budget")
    if state.support <= k:
        return apply_selection(state, np.ones(state.support, dtype=bool))
    p = state.probabilities()
    denom = np.ones(state.support)
    for c in schmidt3_cuts(state.n_qubits):
        denom = denom * sector_counts(state.keys, c)
    return _select_by_score(state, k, p / np.cbrt(denom))


def truncate_random(state: SparseState, k: int, rng: np.random.Generator) -> TruncationEvent:
    """Keep k stored keys chosen uniformly without replacement."""
    if k < 1:
        raise ValueError("invalid budget")
    mask = np.zeros(state.support, dtype=bool)
    if state.support <= k:
        mask[:] = True
    else:
        mask[rng.choice(state.support, size=k, replace=False)] = True
    return apply_selection(state, mask)


@dataclass(frozen=True)
class EstimatorParams:
    z: float = 0.104
    eta: float = 9.069
    delta: float = 3.807
    alpha_min: float = 0.01
    alpha_max: float = 1.0

    def __post_init__(self):
        if not (self.z > 0 and self.eta > 0 and self.delta > 0):
            raise ValueError("estimator constants must be positive")


FITTED = EstimatorParams()
# the baseline preset gives no exponent of its own; it reuses the fitted delta
BASELINE = EstimatorParams(z=0.82, eta=3.72, delta=3.807)
PRESETS = {"fitted": FITTED, "baseline": BASELINE}


def calibrated_alpha(gamma2_tot: float, gate_count: int, params: EstimatorParams = FITTED) -> float:
    g = float(gamma2_tot)
    m = max(int(gate_count), 1)
    alpha_a = 1.0 - params.z * math.sqrt(max(1.0 - g, 0.0) / (g * params.eta * m))
    alpha_b = 1.0 - g / m ** params.delta
    return min(max(min(alpha_a, alpha_b), params.alpha_min), params.alpha_max)


def calibrated_R(gamma2_tot: float, gate_count: int, params: EstimatorParams = FITTED) -> float:
    """alpha(gamma^2, M) * gamma^2; zero when gamma^2 is not positive."""
    if gamma2_tot <= 0:
        return 0.0
    return calibrated_alpha(gamma2_tot, gate_count, params) * float(gamma2_tot)


def violation_check(F: float, R: float) -> bool:
    """R overestimates F beyond both the absolute and relative floors."""
    gap = R - F
    return gap > 1e-6 and gap / max(F, 1e-300) > 1e-3
