"""Reduced density matrices of sparse states and small eigensolvers."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .hashtable import ProbeTable
from .kernels import local_index
from .state import SparseState

EPS_MACH = 2.22e-16
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 50
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class Rdm1:
    """Single-qubit RDM [[a, b], [conj(b), d]]."""

    a: float
    d: float
    b: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b.conjugate(), self.d]], dtype=np.complex128)

    @classmethod
    def from_matrix(cls, m) -> "Rdm1":
        m = np.asarray(m)
        return cls(float(m[0, 0].real), float(m[1, 1].real), complex(m[0, 1]))

    def entropy(self) -> float:
        """von Neumann entropy in bits."""
        lam = np.clip(np.linalg.eigvalsh(self.matrix), 0.0, None)
        lam = lam[lam > 0]
        return float(-np.sum(lam * np.log2(lam)))


def rdm1_all(state: SparseState, table: ProbeTable | None = None) -> list[Rdm1]:
    """All single-qubit RDMs from one hash table of the support."""
    keys, amps = state.keys, state.amps
    if table is None:
        table = ProbeTable.from_items(keys, amps)
    p = amps.real ** 2 + amps.imag ** 2
    out = []
    for j in range(state.n_qubits):
        bit = np.uint64(1 << j)
        low = (keys & bit) == 0
        a = float(p[low].sum())
        d = float(p[~low].sum())
        partner = table.get(keys[low] | bit)
        b = complex(np.dot(amps[low], partner.conj()))
        out.append(Rdm1(a, d, b))
    return out


def is_effectively_diagonal(rho: Rdm1) -> bool:
    b2 = rho.b.real ** 2 + rho.b.imag ** 2
    return b2 < EPS_MACH * max(abs(rho.a), abs(rho.d))


def dominant_eigvec_2x2(rho: Rdm1) -> tuple[np.ndarray, float]:
    """Closed-form dominant eigenpair of a Hermitian 2x2 matrix.

    v is proportional to (b, tau + Delta); when tau < 0 the equivalent form
    (Delta - tau, conj(b)) is used so neither branch subtracts close numbers.
    """
    a, d, b = rho.a, rho.d, rho.b
    if is_effectively_diagonal(rho):
        if a >= d:
            return np.array([1.0 + 0j, 0j]), a
        return np.array([0j, 1.0 + 0j]), d
    tau = 0.5 * (d - a)
    delta = math.hypot(tau, abs(b))
    lam = 0.5 * (a + d) + delta
    if tau >= 0:
        v0, v1 = b, complex(tau + delta)
    else:
        v0, v1 = complex(delta - tau), b.conjugate()
    nrm = math.hypot(abs(v0), abs(v1))
    v0, v1 = _fix_phase2(v0 / nrm, v1 / nrm)
    return np.array([v0, v1], dtype=np.complex128), lam


def _fix_phase2(v0: complex, v1: complex) -> tuple[complex, complex]:
    """Rephase so the first nonzero entry is exactly real positive."""
    if v0 != 0:
        ph = v0.conjugate() / abs(v0)
        return complex(abs(v0)), v1 * ph
    return v0, complex(abs(v1))


def fix_column_phases(v: np.ndarray) -> np.ndarray:
    """Rephase each column so its first nonzero entry is real positive."""
    v = np.array(v, dtype=np.complex128)
    for c in range(v.shape[1]):
        nz = np.flatnonzero(v[:, c] != 0)
        if nz.size:
            lead = v[nz[0], c]
            v[:, c] *= np.conj(lead) / abs(lead)
            v[nz[0], c] = abs(v[nz[0], c])
    return v


def eigenbasis_2x2(rho: Rdm1) -> np.ndarray:
    """Unitary whose columns are the dominant and subdominant eigenvectors."""
    (v0, v1), _ = dominant_eigvec_2x2(rho)
    p0, p1 = _fix_phase2(-v1.conjugate(), v0.conjugate())
    return np.array([[v0, p0], [v1, p1]], dtype=np.complex128)


def rdm2(state: SparseState, q1: int, q2: int) -> np.ndarray:
    """Two-qubit RDM indexed by s = 2*b(q1) + b(q2), grouping keys by the rest index."""
    if q1 == q2:
        raise ValueError("rdm2 needs two distinct qubits")
    keys, amps = state.keys, state.amps
    mask = np.uint64((1 << q1) | (1 << q2))
    rest = keys & ~mask
    s = local_index(keys, (q1, q2))
    order = np.argsort(rest, kind="stable")
    rest_sorted = rest[order]
    starts = np.empty(rest_sorted.size, dtype=bool)
    if rest_sorted.size:
        starts[0] = True
        starts[1:] = rest_sorted[1:] != rest_sorted[:-1]
    group = np.cumsum(starts) - 1
    psi = np.zeros((int(starts.sum()), 4), dtype=np.complex128)
    psi[group, s[order]] = amps[order]
    rho = psi.T @ psi.conj()
    return 0.5 * (rho + rho.conj().T)


def eig4_hermitian(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi for a 4x4 Hermitian matrix.

    Returns (V, w) with w descending and V^dagger rho V = diag(w).
    """
    a = np.array(rho, dtype=np.complex128)
    if a.shape != (4, 4):
        raise ValueError("eig4_hermitian expects a 4x4 matrix")
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    n = 4
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(a)))
    pivots = [(p, q) for p in range(n) for q in range(p + 1, n)]
    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(2.0 * sum(abs(a[p, q]) ** 2 for p, q in pivots))
        if off < JACOBI_TOL * scale:
            break
        for p, q in pivots:
            apq = a[p, q]
            r = abs(apq)
            if r == 0.0:
                continue
            phase = cmath.exp(-1j * cmath.phase(apq))
            theta = 0.5 * math.atan2(2.0 * r, (a[q, q] - a[p, p]).real)
            c, s = math.cos(theta), math.sin(theta)
            # J = diag(1, phase) on (p, q) followed by the real rotation [[c, s], [-s, c]]
            j = np.eye(n, dtype=np.complex128)
            j[p, p] = c
            j[p, q] = s
            j[q, p] = -s * phase
            j[q, q] = c * phase
            a = j.conj().T @ a @ j
            v = v @ j
    w = a.diagonal().real
    order = np.argsort(-w, kind="stable")
    return fix_column_phases(v[:, order]), w[order]
