"""Benchmark circuit families and circuit serialization."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import numpy as np

from .gates import CNOT, H, S, Gate, expm_hermitian, haar_unitary, rx, rz, rzz
from .gates import X as PX
from .gates import Z as PZ


class Family(str, Enum):
    BRICKWORK1D = "brickwork1d"
    BRICKWORK2D = "brickwork2d"
    HAAR_PAIRS = "haar_pairs"
    QAOA = "qaoa"
    RFIM = "rfim"
    UCCSD = "uccsd"
    TFIM = "tfim"


DEFAULT_PARAMS: dict[Family, dict] = {
    Family.BRICKWORK1D: {"depth": 5},
    Family.BRICKWORK2D: {"depth": 4},
    Family.HAAR_PAIRS: {"depth": 3},
    Family.QAOA: {"p": 3, "epsilon": 0.05},
    Family.RFIM: {"depth": 5, "W": 2.0, "dt": 0.2, "J": 1.0, "h0": 1.0, "variant": "sublayer", "h_max": 0.1},
    Family.UCCSD: {"trotter_steps": 1, "single_scale": 0.3, "double_scale": 0.05},
    Family.TFIM: {"depth": 5, "dt": 0.2, "J": 1.0, "h0": 1.0},
}


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate]
    family: str = "custom"
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for g in self.gates:
            g.validate(self.n_qubits)

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def depth(self) -> int | None:
        for key in ("depth", "p", "trotter_steps"):
            if key in self.params:
                return int(self.params[key])
        return None

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n_qubits": self.n_qubits,
            "seed": self.seed,
            "params": self.params,
            "gates": [
                {
                    "targets": list(g.targets),
                    "matrix": [[float(z.real), float(z.imag)] for z in g.matrix.ravel()],
                }
                for g in self.gates
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "Circuit":
        gates = []
        for g in doc["gates"]:
            flat = np.array([complex(re, im) for re, im in g["matrix"]], dtype=np.complex128)
            dim = int(round(np.sqrt(flat.size)))
            gates.append(Gate(tuple(g["targets"]), flat.reshape(dim, dim)))
        return cls(doc["n_qubits"], gates, doc.get("family", "custom"), doc.get("seed"), doc.get("params", {}))

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        """Hash of the gate bytes; identical circuits share it."""
        h = hashlib.blake2b(digest_size=12)
        h.update(np.int64(self.n_qubits).tobytes())
        for g in self.gates:
            h.update(np.asarray(g.targets, dtype=np.int64).tobytes())
            h.update(np.ascontiguousarray(g.matrix).tobytes())
        return h.hexdigest()


# ---------------------------------------------------------------- families


def brickwork_pairs(n_qubits: int, layer: int) -> list[tuple[int, int]]:
    """Nearest-neighbor pairs of 1-based layer ``layer`` on an open chain."""
    start = 0 if layer % 2 == 1 else 1
    return [(q, q + 1) for q in range(start, n_qubits - 1, 2)]


def _brickwork1d(n, params, rng):
    gates = []
    for layer in range(1, int(params["depth"]) + 1):
        for pair in brickwork_pairs(n, layer):
            gates.append(Gate(pair, haar_unitary(4, rng)))
    return gates


def grid_shape(n_qubits: int, params: dict) -> tuple[int, int]:
    rows, cols = params.get("rows"), params.get("cols")
    if rows is None and cols is None:
        rows = int(np.sqrt(n_qubits))
        while rows > 1 and n_qubits % rows:
            rows -= 1
        cols = n_qubits // rows
    elif rows is None:
        rows = n_qubits // int(cols)
    elif cols is None:
        cols = n_qubits // int(rows)
    rows, cols = int(rows), int(cols)
    if rows * cols != n_qubits or rows < 1 or cols < 1:
        raise ValueError(f"grid {rows}x{cols} does not factor N={n_qubits}")
    return rows, cols


def brickwork2d_pairs(rows: int, cols: int, layer: int) -> list[tuple[int, int]]:
    """0-based layer: even layers horizontal, odd vertical; offsets alternate."""
    offset = (layer // 2) % 2
    pairs = []
    if layer % 2 == 0:
        for r in range(rows):
            for c in range(offset, cols - 1, 2):
                pairs.append((r * cols + c, r * cols + c + 1))
    else:
        for r in range(offset, rows - 1, 2):
            for c in range(cols):
                pairs.append((r * cols + c, (r + 1) * cols + c))
    return pairs


def _brickwork2d(n, params, rng):
    rows, cols = grid_shape(n, params)
    params["rows"], params["cols"] = rows, cols
    gates = []
    for layer in range(int(params["depth"])):
        for pair in brickwork2d_pairs(rows, cols, layer):
            gates.append(Gate(pair, haar_unitary(4, rng)))
    return gates


def _haar_pairs(n, params, rng):
    if n < 2:
        raise ValueError("Haar pair circuits need at least 2 qubits")
    gates = []
    for _ in range(int(params["depth"])):
        perm = rng.permutation(n)
        for a in range(0, n - 1, 2):
            gates.append(Gate((int(perm[a]), int(perm[a + 1])), haar_unitary(4, rng)))
    return gates


def random_3regular_graph(n_vertices: int, rng: np.random.Generator, max_tries: int = 10000) -> list[tuple[int, int]]:
    """Simple 3-regular graph by the pairing model, retrying whole matchings."""
    if n_vertices % 2 or n_vertices < 4:
        raise ValueError("a 3-regular graph needs an even vertex count of at least 4")
    stubs = np.repeat(np.arange(n_vertices), 3)
    for _ in range(max_tries):
        perm = rng.permutation(stubs)
        u, v = perm[0::2], perm[1::2]
        if np.any(u == v):
            continue
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        codes = lo * n_vertices + hi
        if np.unique(codes).size != codes.size:
            continue
        order = np.argsort(codes)
        return [(int(a), int(b)) for a, b in zip(lo[order], hi[order])]
    raise RuntimeError("pairing model did not produce a simple graph")


def qaoa_angles(p: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(1, p + 1)
    arg = (2 * k - 1) * np.pi / (4 * p)
    return np.pi / 4 * np.sin(arg), np.pi / 4 * np.cos(arg)


def _qaoa(n, params, rng):
    if n % 2:
        raise ValueError("QAOA on 3-regular graphs needs an even number of qubits")
    p = int(params["p"])
    eps = float(params["epsilon"])
    edges = random_3regular_graph(n, rng)
    gammas, betas = qaoa_angles(p)
    gammas = gammas + rng.uniform(-eps, eps, size=p)
    betas = betas + rng.uniform(-eps, eps, size=p)
    params["edges"] = [list(e) for e in edges]
    params["gammas"] = gammas.tolist()
    params["betas"] = betas.tolist()
    gates = [Gate((q,), H) for q in range(n)]
    for g, b in zip(gammas, betas):
        cost = rzz(-g)  # exp(+i g ZZ / 2)
        gates.extend(Gate(e, cost) for e in edges)
        mixer = rx(2 * b)  # exp(-i b X)
        gates.extend(Gate((q,), mixer) for q in range(n))
    return gates


def _rfim_sublayers(n, params, rng, disorder: np.ndarray):
    J, h0, dt = float(params["J"]), float(params["h0"]), float(params["dt"])
    zz = rzz(-2 * J * dt)  # exp(+i J dt ZZ)
    xr = rx(-2 * h0 * dt)  # exp(+i h0 dt X)
    gates = []
    for _ in range(int(params["depth"])):
        gates.extend(Gate((q, q + 1), zz) for q in range(n - 1))
        gates.extend(Gate((q,), xr) for q in range(n))
        gates.extend(Gate((q,), rz(-2 * d * dt)) for q, d in enumerate(disorder))
    return gates


def _rfim(n, params, rng):
    if params.get("variant", "sublayer") == "brickwork":
        return _rfim_brickwork(n, params, rng)
    W = float(params["W"])
    disorder = rng.uniform(-W, W, size=n)
    params["disorder"] = disorder.tolist()
    return _rfim_sublayers(n, params, rng, disorder)


def _rfim_brickwork(n, params, rng):
    J, dt, hmax = float(params["J"]), float(params["dt"]), float(params["h_max"])
    fields = rng.uniform(0.0, hmax, size=n)
    params["fields"] = fields.tolist()
    zz = np.kron(PZ, PZ)
    eye = np.eye(2)
    gates = []
    for _ in range(int(params["depth"])):
        for layer in (1, 2):
            for i, j in brickwork_pairs(n, layer):
                hij = J * zz + fields[i] * np.kron(PX, eye) + fields[j] * np.kron(eye, PX)
                gates.append(Gate((i, j), expm_hermitian(hij, dt)))
    return gates


def _tfim(n, params, rng):
    return _rfim_sublayers(n, params, rng, np.zeros(n))


# UCCSD: Jordan-Wigner excitation generators as Pauli sums, each string
# exponentiated by a basis change, a CNOT ladder and one Z rotation.

_PAULI_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


def _pauli_product(a: dict, b: dict) -> dict:
    out: dict[str, complex] = {}
    for sa, ca in a.items():
        for sb, cb in b.items():
            phase = 1
            chars = []
            for pa, pb in zip(sa, sb):
                f, r = _PAULI_MUL[(pa, pb)]
                phase *= f
                chars.append(r)
            key = "".join(chars)
            out[key] = out.get(key, 0) + ca * cb * phase
    return out


def _ladder_op(n: int, p: int, create: bool) -> dict:
    """a_p^dagger (create) or a_p with |1> occupied: Z-string on q < p."""
    base = ["Z"] * p + ["I"] * (n - p)
    sx, sy = base.copy(), base.copy()
    sx[p], sy[p] = "X", "Y"
    sign = -0.5j if create else 0.5j
    return {"".join(sx): 0.5, "".join(sy): sign}


def excitation_generator(n: int, creators: list[int], annihilators: list[int]) -> dict:
    """Pauli coefficients of T - T^dagger for T = prod a^dag(creators) prod a(annihilators)."""
    op = {"I" * n: 1.0}
    for p in creators:
        op = _pauli_product(op, _ladder_op(n, p, True))
    for p in annihilators:
        op = _pauli_product(op, _ladder_op(n, p, False))
    gen: dict[str, complex] = {}
    for s, c in op.items():
        gen[s] = gen.get(s, 0) + c
        gen[s] = gen[s] - np.conj(c)  # Pauli strings are Hermitian
    return {s: c for s, c in gen.items() if abs(c) > 1e-14}


def pauli_exponential_gates(pauli: str, angle: float) -> list[Gate]:
    """Gates for exp(i * angle * P), P a Pauli string (character q acts on qubit q)."""
    support = [q for q, c in enumerate(pauli) if c != "I"]
    if not support:
        return []
    pre, post = [], []
    for q in support:
        c = pauli[q]
        if c == "X":
            pre.append(Gate((q,), H))
            post.append(Gate((q,), H))
        elif c == "Y":
            # (H S^dag) Y (S H) = Z
            pre.append(Gate((q,), H @ S.conj().T))
            post.append(Gate((q,), S @ H))
    ladder = [Gate((a, b), CNOT) for a, b in zip(support[:-1], support[1:])]
    rot = Gate((support[-1],), rz(-2 * angle))
    return pre + ladder + [rot] + ladder[::-1] + post


def _uccsd(n, params, rng):
    if n < 2:
        raise ValueError("UCCSD needs at least 2 qubits")
    n_occ = n // 2
    occ, virt = range(n_occ), range(n_occ, n)
    singles = [(i, a) for i in occ for a in virt]
    doubles = [(i, j, a, b) for i, j in combinations(occ, 2) for a, b in combinations(virt, 2)]
    t1 = rng.uniform(-params["single_scale"], params["single_scale"], size=len(singles))
    t2 = rng.uniform(-params["double_scale"], params["double_scale"], size=len(doubles))
    steps = int(params["trotter_steps"])
    gates = [Gate((q,), PX) for q in occ]
    terms = [([a], [i], th) for (i, a), th in zip(singles, t1)]
    terms += [([b, a], [j, i], th) for (i, j, a, b), th in zip(doubles, t2)]
    for _ in range(steps):
        for creators, annihilators, theta in terms:
            gen = excitation_generator(n, creators, annihilators)
            # theta * gen = i * sum c_s P_s with real c_s; all strings commute
            for pauli in sorted(gen):
                coeff = gen[pauli]
                c = float((theta / steps * coeff / 1j).real)
                gates.extend(pauli_exponential_gates(pauli, c))
    return gates


_BUILDERS = {
    Family.BRICKWORK1D: _brickwork1d,
    Family.BRICKWORK2D: _brickwork2d,
    Family.HAAR_PAIRS: _haar_pairs,
    Family.QAOA: _qaoa,
    Family.RFIM: _rfim,
    Family.UCCSD: _uccsd,
    Family.TFIM: _tfim,
}


def generate_circuit(family: str | Family, n_qubits: int, params: dict | None = None, seed: int = 0) -> Circuit:
    """Build a circuit deterministically from (family, n_qubits, params, seed)."""
    fam = Family(family)
    merged = dict(DEFAULT_PARAMS[fam])
    merged.update(params or {})
    rng = np.random.default_rng(seed)
    gates = _BUILDERS[fam](int(n_qubits), merged, rng)
    return Circuit(int(n_qubits), gates, fam.value, int(seed), merged)
