"""Gate container, Haar sampling and a few standard matrices.

Two-qubit matrices are indexed by s = 2*b(q1) + b(q2), so the first target is
the high bit of the 4x4 index and ``np.kron(A, B)`` places A on targets[0].
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

UNITARY_TOL = 1e-12

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
S = np.diag([1, 1j]).astype(np.complex128)
CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)
# control on targets[0] (high bit), target on targets[1]
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)


@dataclass
class Gate:
    targets: tuple[int, ...]
    matrix: np.ndarray
    diagonal_hint: bool | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        self.targets = tuple(int(t) for t in self.targets)
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        dim = 1 << len(self.targets)
        if len(self.targets) not in (1, 2):
            raise ValueError("gates act on one or two qubits")
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {len(self.targets)} targets")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("target qubits must be distinct")
        if min(self.targets) < 0:
            raise ValueError("negative qubit index")

    @property
    def arity(self) -> int:
        return len(self.targets)

    def unitarity_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))

    def validate(self, n_qubits: int) -> None:
        if max(self.targets) >= n_qubits:
            raise ValueError(f"target {max(self.targets)} out of range for {n_qubits} qubits")
        err = self.unitarity_error()
        if err > UNITARY_TOL:
            raise ValueError(f"gate matrix not unitary (error {err:.2e})")

    def inverse(self) -> "Gate":
        return Gate(self.targets, self.matrix.conj().T, self.diagonal_hint, self.label)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from QR of a complex Gaussian matrix.

    Columns are rephased so that R has a positive real diagonal, which makes
    the factorization unique and the distribution exactly Haar.
    """
    if dim not in (2, 4):
        raise ValueError("dim must be 2 or 4")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t h) for Hermitian h via its eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def rx(theta: float) -> np.ndarray:
    """exp(-i theta X / 2)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def rz(theta: float) -> np.ndarray:
    """exp(-i theta Z / 2)."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]).astype(np.complex128)


def rzz(theta: float) -> np.ndarray:
    """exp(-i theta Z Z / 2)."""
    a, b = np.exp(-0.5j * theta), np.exp(0.5j * theta)
    return np.diag([a, b, b, a]).astype(np.complex128)
