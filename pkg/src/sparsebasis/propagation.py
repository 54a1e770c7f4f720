"""Gate propagation in the rotated working frame and the main simulation loop."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .basis_opt import BasisFrame, OptimizeReport, basis_optimize, pr_trigger, two_qubit_optimize
from .circuits import Circuit
from .gates import Gate
from .kernels import diagonal_apply, matrix_apply
from .state import SparseState, TruncationEvent, participation_ratio, truncate_topk

DIAG_TOL = 1e-12

TruncateFn = Callable[[SparseState, int], TruncationEvent]


@dataclass
class SimConfig:
    k: int
    c_hard: int = 8
    n_opt: int = 5
    n_trunc: int = 1
    tau: float = 0.90
    mode: str = "adaptive"
    max_passes: int = 3
    two_qubit_pass: bool = False
    diag_tol: float = DIAG_TOL
    seed: int | None = None
    # adaptive bookkeeping without ever calling the optimizer
    trigger_enabled: bool = True
    truncation: str = "topk"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("invalid budget")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.c_hard < 1:
            raise ValueError("c_hard must be at least 1")
        if self.n_opt < 1 or self.n_trunc < 1:
            raise ValueError("n_opt and n_trunc must be positive")
        self.mode = self.mode.lower()
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def hard_cap(self, n_qubits: int) -> int:
        return min(self.c_hard * self.k, 1 << n_qubits)


@dataclass
class RunRecord:
    mode: str
    k: int
    n_qubits: int
    gate_count: int
    hard_cap: int
    gamma2_tot: float = 1.0
    fidelity: float | None = None
    final_support: int = 0
    final_pr: float = 0.0
    step_gamma2: list[float] = field(default_factory=list)
    truncations: int = 0
    cap_truncations: int = 0
    pr_trace: list[float] = field(default_factory=list)
    diagonal_gates: int = 0
    general_gates: int = 0
    optimization_checks: int = 0
    optimization_calls: int = 0
    passes_run: int = 0
    rotations_attempted: int = 0
    rotations_accepted: int = 0
    rotations_reverted: int = 0
    rotations_skipped: int = 0
    two_qubit_attempted: int = 0
    two_qubit_accepted: int = 0
    two_qubit_reverted: int = 0
    monotonicity_violations: int = 0
    time_propagate: float = 0.0
    time_truncate: float = 0.0
    time_optimize: float = 0.0
    wall_time: float = 0.0

    def log_event(self, ev: TruncationEvent) -> None:
        self.step_gamma2.append(ev.step_gamma2)

    def absorb(self, rep: OptimizeReport) -> None:
        self.passes_run += rep.passes_run
        self.rotations_attempted += rep.rotations_attempted
        self.rotations_accepted += rep.rotations_accepted
        self.rotations_reverted += rep.rotations_reverted
        self.rotations_skipped += rep.rotations_skipped
        self.monotonicity_violations += rep.monotonicity_violations
        self.step_gamma2.extend(rep.step_gamma2)

    @property
    def revert_rate(self) -> float:
        return self.rotations_reverted / self.rotations_attempted if self.rotations_attempted else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["revert_rate"] = self.revert_rate
        return d


def conjugate_gate(gate: Gate, frame: BasisFrame) -> Gate:
    """(kron U_targets)^dagger G (kron U_targets)."""
    u = frame[gate.targets[0]]
    for q in gate.targets[1:]:
        u = np.kron(u, frame[q])
    return Gate(gate.targets, u.conj().T @ gate.matrix @ u, label=gate.label)


def is_diagonal(gate: Gate, tol: float = DIAG_TOL) -> bool:
    m = gate.matrix
    off = m - np.diag(np.diag(m))
    return bool(np.max(np.abs(off)) <= tol)


def apply_diagonal(state: SparseState, gate: Gate) -> None:
    diagonal_apply(state, gate.targets, np.diag(gate.matrix))


def apply_general(
    state: SparseState, gate: Gate, hard_cap: int | None = None, merge: str = "hash"
) -> TruncationEvent | None:
    """Expand, merge, prune; cut to the top hard_cap entries if the support overflows."""
    matrix_apply(state, gate.targets, gate.matrix, merge)
    if hard_cap is not None and state.support > hard_cap:
        return truncate_topk(state, hard_cap)
    return None


def _resolve_truncation(config: SimConfig) -> TruncateFn:
    if config.truncation == "topk":
        return truncate_topk
    from . import heuristics

    rule = config.truncation
    if rule == "schmidt1":
        return heuristics.truncate_schmidt1
    if rule == "schmidt3":
        return heuristics.truncate_schmidt3
    if rule == "random":
        rng = np.random.default_rng(config.seed)
        return lambda st, k: heuristics.truncate_random(st, k, rng)
    raise ValueError(f"unknown truncation rule {rule!r}")


def run(circuit: Circuit, config: SimConfig) -> tuple[SparseState, BasisFrame, RunRecord]:
    """Simulate a circuit at sparse budget k in the fixed or adaptive frame."""
    t_start = time.perf_counter()
    n = circuit.n_qubits
    adaptive = config.mode == "adaptive"
    k = config.k
    k_hard = config.hard_cap(n)
    merge = "hash" if adaptive else "sort"
    truncate = _resolve_truncation(config)

    state = SparseState.basis(n)
    frame = BasisFrame.identity(n)
    rec = RunRecord(config.mode, k, n, len(circuit.gates), k_hard)

    pr_last = 0.0
    n_since_trunc = 0
    n_active = 0
    for gate in circuit.gates:
        t0 = time.perf_counter()
        g = conjugate_gate(gate, frame) if adaptive else gate
        cap_fired = False
        if is_diagonal(g, config.diag_tol):
            apply_diagonal(state, g)
            rec.diagonal_gates += 1
        else:
            cap_event = apply_general(state, g, k_hard, merge)
            rec.general_gates += 1
            if cap_event is not None:
                rec.log_event(cap_event)
                rec.cap_truncations += 1
                cap_fired = True
        n_since_trunc += 1
        t1 = time.perf_counter()
        rec.time_propagate += t1 - t0

        truncated = False
        if cap_fired or state.support > k_hard:
            truncated = True
        elif state.support > k and n_since_trunc >= config.n_trunc:
            truncated = True
        if truncated:
            rec.log_event(truncate(state, k))
            rec.truncations += 1
            n_since_trunc = 0
            rec.pr_trace.append(participation_ratio(state))
        t2 = time.perf_counter()
        rec.time_truncate += t2 - t1

        if truncated and adaptive:
            n_active += 1
            if n_active % config.n_opt == 0:
                rec.optimization_checks += 1
                pr_cur = participation_ratio(state)
                if config.trigger_enabled and pr_trigger(pr_cur, pr_last, config.tau):
                    rec.optimization_calls += 1
                    rec.absorb(basis_optimize(state, frame, k, config.max_passes))
                    if config.two_qubit_pass:
                        rep2 = two_qubit_optimize(state, k)
                        rec.two_qubit_attempted += rep2.rotations_attempted
                        rec.two_qubit_accepted += rep2.rotations_accepted
                        rec.two_qubit_reverted += rep2.rotations_reverted
                        rec.monotonicity_violations += rep2.monotonicity_violations
                        rec.step_gamma2.extend(rep2.step_gamma2)
                    pr_last = participation_ratio(state)
            rec.time_optimize += time.perf_counter() - t2

    t3 = time.perf_counter()
    rec.log_event(truncate(state, k))
    rec.time_truncate += time.perf_counter() - t3

    rec.gamma2_tot = state.gamma2_tot
    rec.final_support = state.support
    rec.final_pr = participation_ratio(state)
    rec.wall_time = time.perf_counter() - t_start
    return state, frame, rec
