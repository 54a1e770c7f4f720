"""Low-level sparse gate kernels.

A gate on targets (q1, q2) maps each stored key to up to four output keys that
differ only in bits q1 and q2. Contributions are laid out input-major
(for each input key, for each output pattern) and merged by key with sums
taken in that order. The hash merge and the sort merge therefore produce
bit-identical amplitudes, and both return keys sorted ascending.
"""
from __future__ import annotations

import numpy as np

from .hashtable import ProbeTable, segment_sum
from .state import DROP_THRESHOLD, SparseState

MERGE_MODES = ("hash", "sort")


def local_index(keys: np.ndarray, targets: tuple[int, ...]) -> np.ndarray:
    """s = sum_i b(targets[i]) * 2**(len-1-i); targets[0] is the high bit."""
    s = np.zeros(keys.shape, dtype=np.int64)
    for q in targets:
        s = (s << 1) | ((keys >> np.uint64(q)) & np.uint64(1)).astype(np.int64)
    return s


def _patterns(targets: tuple[int, ...]) -> np.ndarray:
    m = len(targets)
    out = np.zeros(1 << m, dtype=np.uint64)
    for s in range(1 << m):
        v = 0
        for i, q in enumerate(targets):
            if (s >> (m - 1 - i)) & 1:
                v |= 1 << q
        out[s] = v
    return out


def diagonal_apply(state: SparseState, targets: tuple[int, ...], diag: np.ndarray) -> None:
    """Rephase amplitudes in place by the diagonal entry of their local index."""
    s = local_index(state.keys, targets)
    state.amps *= np.asarray(diag, dtype=np.complex128)[s]


def expand(keys: np.ndarray, amps: np.ndarray, targets: tuple[int, ...], matrix: np.ndarray):
    """Output keys and contributions, input-major, skipping exact-zero matrix entries."""
    pats = _patterns(targets)
    clear = np.uint64(~int(pats[-1]) & 0xFFFFFFFFFFFFFFFF)
    s_in = local_index(keys, targets)
    base = keys & clear
    dim = pats.size
    out_keys = base[:, None] | pats[None, :]
    coef = matrix.T[s_in]  # coef[i, s_out] = matrix[s_out, s_in[i]]
    out_vals = coef * amps[:, None]
    nz = (coef != 0).ravel()
    out_keys = out_keys.ravel()
    out_vals = out_vals.ravel()
    if not nz.all():
        out_keys = out_keys[nz]
        out_vals = out_vals[nz]
    return out_keys, out_vals


def merge_sort(keys: np.ndarray, vals: np.ndarray):
    uniq, inv = np.unique(keys, return_inverse=True)
    return uniq, segment_sum(inv.ravel(), vals, uniq.size)


def merge_hash(keys: np.ndarray, vals: np.ndarray, n_qubits: int):
    table = ProbeTable(expected=min(keys.size, 1 << n_qubits))
    slots = table.insert(keys)
    sums = segment_sum(slots, vals, table.capacity)
    used = np.flatnonzero(table.used)
    k = table.keys[used]
    order = np.argsort(k, kind="stable")
    return k[order], sums[used][order]


def matrix_apply(state: SparseState, targets: tuple[int, ...], matrix: np.ndarray, merge: str = "hash") -> None:
    """Apply a dense 2x2 or 4x4 matrix on the targets, in place, without truncation."""
    if state.support == 0:
        return
    keys, vals = expand(state.keys, state.amps, targets, np.asarray(matrix, dtype=np.complex128))
    if merge == "hash":
        k, a = merge_hash(keys, vals, state.n_qubits)
    elif merge == "sort":
        k, a = merge_sort(keys, vals)
    else:
        raise ValueError(f"unknown merge mode {merge!r}")
    p = a.real ** 2 + a.imag ** 2
    keep = p > DROP_THRESHOLD
    if not keep.all():
        k, a = k[keep], a[keep]
    state.set_sorted(k, a)
