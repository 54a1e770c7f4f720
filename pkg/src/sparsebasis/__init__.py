"""Sparse-state circuit simulation with top-k truncation in an adaptively
rotated per-qubit product basis."""
from __future__ import annotations

from .basis_opt import (
    BasisFrame,
    OptimizeReport,
    apply_single_qubit_rotation,
    basis_optimize,
    pr_trigger,
    two_qubit_optimize,
)
from .circuits import Circuit, Family, generate_circuit, random_3regular_graph
from .gates import Gate, haar_unitary
from .heuristics import (
    EstimatorParams,
    calibrated_R,
    schmidt_sector,
    truncate_random,
    truncate_schmidt1,
    truncate_schmidt3,
    violation_check,
)
from .propagation import (
    RunRecord,
    SimConfig,
    apply_diagonal,
    apply_general,
    conjugate_gate,
    is_diagonal,
    run,
)
from .rdm import Rdm1, dominant_eigvec_2x2, eig4_hermitian, eigenbasis_2x2, rdm1_all, rdm2
from .reference import dense_simulate, fidelity, half_chain_entropy, partial_trace, pr_z_exact
from .state import SparseState, TruncationEvent, normalize, participation_ratio, truncate_topk

__version__ = "0.1.0"
