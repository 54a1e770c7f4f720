"""Dense statevector oracle: exact simulation, fidelity, PR_Z and entropies."""
from __future__ import annotations

import numpy as np

from .basis_opt import BasisFrame
from .circuits import Circuit
from .state import SparseState

MAX_DENSE_QUBITS = 24


def _check_size(n_qubits: int) -> None:
    if n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"dense operations are limited to N <= {MAX_DENSE_QUBITS}")


def _as_tensor(vec: np.ndarray, n: int) -> np.ndarray:
    # axis a of the tensor holds qubit n-1-a (little-endian indices)
    return vec.reshape((2,) * n)


def apply_dense(vec: np.ndarray, n_qubits: int, targets, matrix: np.ndarray) -> np.ndarray:
    """Return matrix applied to the targets; targets[0] is the high bit of the local index."""
    targets = tuple(targets)
    m = len(targets)
    psi = _as_tensor(vec, n_qubits)
    axes = [n_qubits - 1 - q for q in targets]
    g = np.asarray(matrix, dtype=np.complex128).reshape((2,) * (2 * m))
    out = np.tensordot(g, psi, axes=(list(range(m, 2 * m)), axes))
    out = np.moveaxis(out, list(range(m)), axes)
    return out.reshape(-1)


def basis_vector(n_qubits: int, index: int = 0) -> np.ndarray:
    _check_size(n_qubits)
    v = np.zeros(1 << n_qubits, dtype=np.complex128)
    v[index] = 1.0
    return v


def dense_simulate(circuit: Circuit, initial: np.ndarray | None = None) -> np.ndarray:
    """Exact lab-frame state of the circuit applied to |0...0> (or ``initial``)."""
    n = circuit.n_qubits
    _check_size(n)
    vec = basis_vector(n) if initial is None else np.array(initial, dtype=np.complex128)
    for g in circuit.gates:
        vec = apply_dense(vec, n, g.targets, g.matrix)
    return vec


def rotate_into_frame(vec: np.ndarray, frame: BasisFrame) -> np.ndarray:
    """(kron U_j)^dagger applied to a lab-frame vector."""
    n = frame.n_qubits
    for j, u in enumerate(frame.unitaries):
        vec = apply_dense(vec, n, (j,), u.conj().T)
    return vec


def to_lab_dense(state: SparseState, frame: BasisFrame | None = None) -> np.ndarray:
    vec = state.to_dense()
    if frame is not None:
        for j, u in enumerate(frame.unitaries):
            vec = apply_dense(vec, state.n_qubits, (j,), u)
    return vec


def fidelity(state: SparseState, frame: BasisFrame | None, reference: np.ndarray) -> float:
    """|<reference|lab(state)>|^2 with the sparse state held in ``frame``."""
    reference = np.asarray(reference, dtype=np.complex128)
    if reference.size != 1 << state.n_qubits:
        raise ValueError("reference dimension does not match the sparse state")
    if frame is not None and frame.n_qubits != state.n_qubits:
        raise ValueError("frame size does not match the sparse state")
    ref = reference if frame is None else rotate_into_frame(reference, frame)
    overlap = np.vdot(ref[state.keys.astype(np.int64)], state.amps)
    return float(abs(overlap) ** 2)


def pr_z_exact(vec: np.ndarray) -> float:
    p = np.abs(np.asarray(vec)) ** 2
    return float(p.sum() ** 2 / np.dot(p, p))


def partial_trace(vec: np.ndarray, kept) -> np.ndarray:
    """Density matrix of the kept qubits, indexed with kept[0] as the high bit."""
    vec = np.asarray(vec, dtype=np.complex128)
    n = int(round(np.log2(vec.size)))
    kept = list(kept)
    psi = _as_tensor(vec, n)
    keep_axes = [n - 1 - q for q in kept]
    rest = [a for a in range(n) if a not in keep_axes]
    mat = np.transpose(psi, keep_axes + rest).reshape(1 << len(kept), -1)
    return mat @ mat.conj().T


def half_chain_entropy(vec: np.ndarray) -> float:
    """Entanglement entropy in bits between qubits [0, N/2) and [N/2, N)."""
    vec = np.asarray(vec, dtype=np.complex128)
    n = int(round(np.log2(vec.size)))
    # rows index the high half, columns the low half
    mat = vec.reshape(1 << (n - n // 2), 1 << (n // 2))
    small = mat.conj().T @ mat if mat.shape[1] <= mat.shape[0] else mat @ mat.conj().T
    lam = np.linalg.eigvalsh(small)
    lam = lam[lam > 1e-300]
    lam = lam / lam.sum()
    return float(max(0.0, -np.sum(lam * np.log2(lam))))
