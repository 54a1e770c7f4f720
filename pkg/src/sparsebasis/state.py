"""Sparse amplitude container with top-k truncation.

Keys are little-endian basis indices (qubit j is bit j) stored as sorted
uint64; amplitudes are complex128 aligned with the keys. Keeping the keys
sorted makes every operation deterministic and lets ties at the truncation
boundary resolve to the lowest basis index without extra work.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DROP_THRESHOLD = 1e-30
MAX_QUBITS = 30


@dataclass(frozen=True)
class TruncationEvent:
    step_gamma2: float
    kept: int
    discarded: int


class SparseState:
    """Map from basis index to amplitude plus the running retention product."""

    __slots__ = ("n_qubits", "keys", "amps", "gamma2_tot")

    def __init__(self, n_qubits: int, keys=None, amps=None, gamma2_tot: float = 1.0):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
        self.n_qubits = int(n_qubits)
        if keys is None:
            keys = np.zeros(1, dtype=np.uint64)
            amps = np.ones(1, dtype=np.complex128)
        keys = np.asarray(keys, dtype=np.uint64).ravel()
        amps = np.asarray(amps, dtype=np.complex128).ravel()
        if keys.shape != amps.shape:
            raise ValueError("keys and amplitudes differ in length")
        if keys.size and int(keys.max()) >> self.n_qubits:
            raise ValueError("basis index out of range")
        order = np.argsort(keys, kind="stable")
        keys, amps = keys[order], amps[order]
        if keys.size > 1 and np.any(keys[1:] == keys[:-1]):
            raise ValueError("duplicate basis index")
        self.keys = keys
        self.amps = amps
        self.gamma2_tot = float(gamma2_tot)
        self.prune()

    @classmethod
    def basis(cls, n_qubits: int, index: int = 0) -> "SparseState":
        return cls(n_qubits, [index], [1.0])

    @classmethod
    def from_dense(cls, vec: np.ndarray) -> "SparseState":
        vec = np.asarray(vec, dtype=np.complex128).ravel()
        n = int(round(np.log2(vec.size)))
        if 1 << n != vec.size:
            raise ValueError("dense vector length must be a power of two")
        idx = np.flatnonzero(np.abs(vec) ** 2 > DROP_THRESHOLD)
        return cls(n, idx.astype(np.uint64), vec[idx])

    @classmethod
    def _from_sorted(cls, n_qubits, keys, amps, gamma2_tot=1.0) -> "SparseState":
        out = cls.__new__(cls)
        out.n_qubits = n_qubits
        out.keys = keys
        out.amps = amps
        out.gamma2_tot = gamma2_tot
        return out

    def copy(self) -> "SparseState":
        return SparseState._from_sorted(self.n_qubits, self.keys.copy(), self.amps.copy(), self.gamma2_tot)

    def assign(self, other: "SparseState") -> None:
        """Overwrite this state's contents with another's arrays."""
        self.keys = other.keys
        self.amps = other.amps
        self.gamma2_tot = other.gamma2_tot

    def set_sorted(self, keys: np.ndarray, amps: np.ndarray) -> None:
        self.keys = keys
        self.amps = amps

    @property
    def support(self) -> int:
        return int(self.keys.size)

    def __len__(self) -> int:
        return self.support

    def probabilities(self) -> np.ndarray:
        return self.amps.real ** 2 + self.amps.imag ** 2

    def norm2(self) -> float:
        return float(np.sum(self.probabilities()))

    def prune(self) -> None:
        """Drop entries whose probability is at or below DROP_THRESHOLD."""
        keep = self.probabilities() > DROP_THRESHOLD
        if not keep.all():
            self.keys = self.keys[keep]
            self.amps = self.amps[keep]

    def to_dense(self) -> np.ndarray:
        vec = np.zeros(1 << self.n_qubits, dtype=np.complex128)
        vec[self.keys.astype(np.int64)] = self.amps
        return vec

    def as_dict(self) -> dict[int, complex]:
        return {int(k): complex(a) for k, a in zip(self.keys, self.amps)}

    def __repr__(self) -> str:
        return f"SparseState(n_qubits={self.n_qubits}, support={self.support}, gamma2_tot={self.gamma2_tot:.6g})"


def participation_ratio(state: SparseState) -> float:
    """(sum p)^2 / sum p^2; norm invariant, equals 1/sum p^2 when normalized."""
    if state.support == 0:
        raise ValueError("empty support")
    p = state.probabilities()
    s2 = float(np.dot(p, p))
    if s2 == 0.0:
        raise ValueError("empty support")
    s1 = float(p.sum())
    return s1 * s1 / s2


def normalize(state: SparseState) -> float:
    """Rescale to unit norm and return the squared norm before rescaling."""
    n2 = state.norm2()
    if not n2 > 0.0:
        raise ValueError("null state")
    if n2 != 1.0:
        state.amps = state.amps / np.sqrt(n2)
    return n2


def select_topk(p: np.ndarray, k: int) -> np.ndarray:
    """Boolean mask of the k largest entries of p.

    Ties at the boundary go to the lowest positions, which are the lowest
    basis indices because keys are kept sorted.
    """
    n = p.size
    if k >= n:
        return np.ones(n, dtype=bool)
    threshold = np.partition(p, n - k)[n - k]
    mask = p > threshold
    need = k - int(mask.sum())
    if need > 0:
        ties = np.flatnonzero(p == threshold)[:need]
        mask[ties] = True
    return mask


def apply_selection(state: SparseState, mask: np.ndarray, p: np.ndarray | None = None) -> TruncationEvent:
    """Keep the masked entries, renormalize, and record the retained fraction."""
    if p is None:
        p = state.probabilities()
    total = float(p.sum())
    if not total > 0.0:
        raise ValueError("null state")
    kept = int(mask.sum())
    discarded = state.support - kept
    if discarded:
        retained = float(p[mask].sum())
        state.keys = state.keys[mask]
        state.amps = state.amps[mask]
    else:
        retained = total
    step = retained / total
    state.gamma2_tot *= step
    normalize(state)
    return TruncationEvent(step_gamma2=step, kept=kept, discarded=discarded)


def truncate_topk(state: SparseState, k: int) -> TruncationEvent:
    """Keep the k most probable entries and renormalize."""
    if k < 1:
        raise ValueError("invalid budget")
    p = state.probabilities()
    return apply_selection(state, select_topk(p, k), p)
