"""Coordinate-descent basis optimization with a do-no-harm acceptance rule."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .hashtable import ProbeTable
from .kernels import matrix_apply
from .rdm import eig4_hermitian, eigenbasis_2x2, is_effectively_diagonal, rdm1_all, rdm2
from .state import SparseState, participation_ratio, truncate_topk


@dataclass
class OptimizeReport:
    passes_run: int = 0
    rotations_attempted: int = 0
    rotations_accepted: int = 0
    rotations_reverted: int = 0
    rotations_skipped: int = 0
    pr_before: float = 0.0
    pr_after: float = 0.0
    # PR increases observed across accepted rotations; the guard keeps this at 0
    monotonicity_violations: int = 0
    step_gamma2: list[float] = field(default_factory=list)

    def merge(self, other: "OptimizeReport") -> None:
        self.passes_run += other.passes_run
        self.rotations_attempted += other.rotations_attempted
        self.rotations_accepted += other.rotations_accepted
        self.rotations_reverted += other.rotations_reverted
        self.rotations_skipped += other.rotations_skipped
        self.monotonicity_violations += other.monotonicity_violations
        self.step_gamma2.extend(other.step_gamma2)
        self.pr_after = other.pr_after

    def to_dict(self) -> dict:
        return asdict(self)


class BasisFrame:
    """Per-qubit accumulated 2x2 unitaries; the lab state is (kron U_j) psi."""

    def __init__(self, unitaries):
        self.unitaries = [np.asarray(u, dtype=np.complex128) for u in unitaries]

    @classmethod
    def identity(cls, n_qubits: int) -> "BasisFrame":
        return cls([np.eye(2, dtype=np.complex128) for _ in range(n_qubits)])

    @property
    def n_qubits(self) -> int:
        return len(self.unitaries)

    def __getitem__(self, j: int) -> np.ndarray:
        return self.unitaries[j]

    def copy(self) -> "BasisFrame":
        return BasisFrame([u.copy() for u in self.unitaries])

    def is_identity(self) -> bool:
        eye = np.eye(2)
        return all(np.array_equal(u, eye) for u in self.unitaries)

    def unitarity_error(self) -> float:
        eye = np.eye(2)
        return max((float(np.max(np.abs(u.conj().T @ u - eye))) for u in self.unitaries), default=0.0)

    def to_list(self) -> list:
        return [[[float(z.real), float(z.imag)] for z in u.ravel()] for u in self.unitaries]


def apply_single_qubit_rotation(state: SparseState, j: int, v: np.ndarray, merge: str = "hash") -> None:
    """Apply V^dagger to qubit j in place; missing bit-flip partners count as zero."""
    matrix_apply(state, (j,), np.asarray(v, dtype=np.complex128).conj().T, merge)


def pr_trigger(pr_cur: float, pr_last: float, tau: float) -> bool:
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must lie in (0, 1]")
    return pr_last == 0 or pr_cur > pr_last / tau


def basis_optimize(state: SparseState, frame: BasisFrame, k: int, max_passes: int = 3) -> OptimizeReport:
    """Sweep qubits in ascending order, keeping each RDM-eigenbasis rotation
    only if the post-truncation PR strictly drops."""
    rep = OptimizeReport()
    pr_old = participation_ratio(state)
    rep.pr_before = pr_old
    for _ in range(max_passes):
        improved = False
        table = ProbeTable.from_items(state.keys, state.amps)
        rdms = rdm1_all(state, table)  # snapshot reused for the whole pass
        for j, rho in enumerate(rdms):
            if is_effectively_diagonal(rho):
                rep.rotations_skipped += 1
                continue
            v = eigenbasis_2x2(rho)
            trial = state.copy()
            apply_single_qubit_rotation(trial, j, v)
            ev = truncate_topk(trial, k)
            pr_new = participation_ratio(trial)
            rep.rotations_attempted += 1
            if pr_new < pr_old:
                pr_held = participation_ratio(state)
                state.assign(trial)
                frame.unitaries[j] = frame.unitaries[j] @ v
                if participation_ratio(state) > pr_held:
                    rep.monotonicity_violations += 1
                pr_old = pr_new
                rep.rotations_accepted += 1
                rep.step_gamma2.append(ev.step_gamma2)
                improved = True
            else:
                rep.rotations_reverted += 1
        rep.passes_run += 1
        if not improved:
            break
    rep.pr_after = participation_ratio(state)
    return rep


def brickwall_pairs(n_qubits: int) -> list[tuple[int, int]]:
    even = [(q, q + 1) for q in range(0, n_qubits - 1, 2)]
    odd = [(q, q + 1) for q in range(1, n_qubits - 1, 2)]
    return even + odd


def two_qubit_optimize(state: SparseState, k: int) -> OptimizeReport:
    """Rotate-truncate-undo on nearest-neighbor pairs; the frame is left untouched."""
    rep = OptimizeReport()
    pr_old = participation_ratio(state)
    rep.pr_before = pr_old
    rep.passes_run = 1
    eye = np.eye(4)
    for q1, q2 in brickwall_pairs(state.n_qubits):
        v, _ = eig4_hermitian(rdm2(state, q1, q2))
        if np.allclose(v, eye, rtol=0.0, atol=1e-14):
            rep.rotations_skipped += 1
            continue
        trial = state.copy()
        matrix_apply(trial, (q1, q2), v.conj().T)
        ev1 = truncate_topk(trial, k)
        matrix_apply(trial, (q1, q2), v)
        ev2 = truncate_topk(trial, k)
        pr_new = participation_ratio(trial)
        rep.rotations_attempted += 1
        if pr_new < pr_old:
            pr_held = participation_ratio(state)
            state.assign(trial)
            if participation_ratio(state) > pr_held:
                rep.monotonicity_violations += 1
            pr_old = pr_new
            rep.rotations_accepted += 1
            rep.step_gamma2.extend([ev1.step_gamma2, ev2.step_gamma2])
        else:
            rep.rotations_reverted += 1
    rep.pr_after = participation_ratio(state)
    return rep
