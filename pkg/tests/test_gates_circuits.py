from __future__ import annotations

import math
from collections import Counter
from itertools import combinations

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsebasis.circuits import (
    Circuit,
    Family,
    brickwork2d_pairs,
    brickwork_pairs,
    excitation_generator,
    generate_circuit,
    grid_shape,
    pauli_exponential_gates,
    qaoa_angles,
    random_3regular_graph,
)
from sparsebasis.gates import CNOT, CZ, H, Gate, haar_unitary, rx, rz, rzz
from sparsebasis.reference import apply_dense, basis_vector, dense_simulate

PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
}


def pauli_dense(s: str) -> np.ndarray:
    # character q acts on qubit q; qubit 0 is the least significant bit
    out = np.eye(1)
    for c in s:
        out = np.kron(PAULI[c], out)
    return out


def jw_annihilator(n: int, p: int) -> np.ndarray:
    """Dense a_p with |1> occupied and a Z string on qubits below p."""
    lower = np.array([[0, 1], [0, 0]])  # |0><1|
    out = np.eye(1)
    for q in range(n):
        f = PAULI["Z"] if q < p else (lower if q == p else np.eye(2))
        out = np.kron(f, out)
    return out


class TestGate:
    def test_validation(self):
        with pytest.raises(ValueError):
            Gate((0, 0), np.eye(4))
        with pytest.raises(ValueError):
            Gate((0,), np.eye(4))
        with pytest.raises(ValueError, match="out of range"):
            Gate((0, 3), np.eye(4)).validate(3)
        with pytest.raises(ValueError, match="unitary"):
            Gate((0,), np.array([[1, 1], [0, 1]])).validate(1)

    def test_inverse(self):
        g = Gate((1, 0), haar_unitary(4, np.random.default_rng(0)))
        np.testing.assert_allclose(g.inverse().matrix @ g.matrix, np.eye(4), atol=1e-14)

    def test_rotations(self):
        t = 0.37
        np.testing.assert_allclose(rx(t), scipy.linalg.expm(-0.5j * t * PAULI["X"]), atol=1e-15)
        np.testing.assert_allclose(rz(t), scipy.linalg.expm(-0.5j * t * PAULI["Z"]), atol=1e-15)
        np.testing.assert_allclose(rzz(t), scipy.linalg.expm(-0.5j * t * np.kron(PAULI["Z"], PAULI["Z"])), atol=1e-15)

    def test_cnot_control_is_first_target(self):
        # CNOT(control 0, target 1) maps |01> (bit0 = 1) to |11>
        v = apply_dense(basis_vector(2, 0b01), 2, (0, 1), CNOT)
        np.testing.assert_array_equal(v, basis_vector(2, 0b11))


class TestHaar:
    @pytest.mark.parametrize("dim", [2, 4])
    def test_unitary_and_deterministic(self, dim):
        u = haar_unitary(dim, np.random.default_rng(5))
        assert np.max(np.abs(u.conj().T @ u - np.eye(dim))) <= 1e-12
        np.testing.assert_array_equal(u, haar_unitary(dim, np.random.default_rng(5)))

    def test_first_moment(self):
        rng = np.random.default_rng(1)
        m = np.mean([abs(haar_unitary(2, rng)[0, 0]) ** 2 for _ in range(10_000)])
        assert abs(m - 0.5) < 0.02

    def test_phase_distribution_uniform(self):
        # without the R-diagonal phase fix the phases of U00 concentrate
        rng = np.random.default_rng(2)
        ph = np.array([np.angle(haar_unitary(2, rng)[0, 0]) for _ in range(4000)])
        counts, _ = np.histogram(ph, bins=8, range=(-np.pi, np.pi))
        assert counts.min() > 400

    def test_bad_dim(self):
        with pytest.raises(ValueError):
            haar_unitary(3, np.random.default_rng(0))


class TestBrickwork:
    def test_small_chain_layers(self):
        assert brickwork_pairs(4, 1) == [(0, 1), (2, 3)]
        assert brickwork_pairs(4, 2) == [(1, 2)]
        c = generate_circuit("brickwork1d", 4, {"depth": 2}, seed=7)
        assert [g.targets for g in c.gates] == [(0, 1), (2, 3), (1, 2)]

    @pytest.mark.parametrize("n,depth", [(5, 3), (8, 5)])
    def test_layer_parity(self, n, depth):
        c = generate_circuit("brickwork1d", n, {"depth": depth}, seed=1)
        expected = [p for layer in range(1, depth + 1) for p in brickwork_pairs(n, layer)]
        assert [g.targets for g in c.gates] == expected
        for layer in range(1, depth + 1):
            assert all(a % 2 == (layer + 1) % 2 for a, _ in brickwork_pairs(n, layer))

    def test_2d_layers(self):
        assert grid_shape(6, {}) == (2, 3)
        assert brickwork2d_pairs(2, 3, 0) == [(0, 1), (3, 4)]
        assert brickwork2d_pairs(2, 3, 1) == [(0, 3), (1, 4), (2, 5)]
        assert brickwork2d_pairs(2, 3, 2) == [(1, 2), (4, 5)]
        with pytest.raises(ValueError):
            grid_shape(6, {"rows": 4})

    def test_haar_pairs_disjoint_per_layer(self):
        n = 9
        c = generate_circuit("haar_pairs", n, {"depth": 3}, seed=4)
        per_layer = n // 2
        assert len(c) == 3 * per_layer
        for layer in range(3):
            qubits = [q for g in c.gates[layer * per_layer:(layer + 1) * per_layer] for q in g.targets]
            assert len(set(qubits)) == len(qubits)


class TestQaoa:
    def test_angles_p1(self):
        g, b = qaoa_angles(1)
        assert g[0] == pytest.approx(math.pi / 4 * math.sin(math.pi / 4))
        assert b[0] == pytest.approx(0.5553603672697958, abs=1e-15)

    def test_k4(self):
        edges = random_3regular_graph(4, np.random.default_rng(0))
        assert edges == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

    @pytest.mark.parametrize("n", [6, 8, 12, 20])
    def test_regular_simple(self, n):
        edges = random_3regular_graph(n, np.random.default_rng(n))
        deg = Counter(v for e in edges for v in e)
        assert all(deg[v] == 3 for v in range(n))
        assert len(set(edges)) == len(edges) == 3 * n // 2
        assert all(a < b for a, b in edges)

    def test_deterministic(self):
        a = random_3regular_graph(8, np.random.default_rng(3))
        assert a == random_3regular_graph(8, np.random.default_rng(3))

    def test_odd_rejected(self):
        with pytest.raises(ValueError):
            random_3regular_graph(7, np.random.default_rng(0))
        with pytest.raises(ValueError):
            generate_circuit("qaoa", 7)

    def test_matches_cost_mixer_oracle(self):
        n = 6
        c = generate_circuit("qaoa", n, {"p": 2}, seed=9)
        zs = [pauli_dense("I" * q + "Z" + "I" * (n - q - 1)) for q in range(n)]
        cost = sum(zs[a] @ zs[b] for a, b in c.params["edges"])
        mixer = sum(pauli_dense("I" * q + "X" + "I" * (n - q - 1)) for q in range(n))
        psi = np.full(1 << n, 2 ** (-n / 2), dtype=complex)
        for g, b in zip(c.params["gammas"], c.params["betas"]):
            psi = scipy.linalg.expm(0.5j * g * cost) @ psi
            psi = scipy.linalg.expm(-1j * b * mixer) @ psi
        np.testing.assert_allclose(dense_simulate(c), psi, atol=1e-12)


class TestRfim:
    def test_zero_disorder_is_tfim(self):
        a = generate_circuit("rfim", 3, {"depth": 1, "W": 0.0}, seed=2)
        b = generate_circuit("tfim", 3, {"depth": 1}, seed=2)
        assert a.params["disorder"] == [0.0, 0.0, 0.0]
        for ga, gb in zip(a.gates, b.gates):
            np.testing.assert_allclose(ga.matrix, gb.matrix, atol=0)
        # the U_Delta sublayer is the identity up to phases
        for g in a.gates[-3:]:
            np.testing.assert_allclose(g.matrix, np.eye(2), atol=0)

    def test_sublayer_diagonality(self):
        n = 4
        c = generate_circuit("rfim", n, {"depth": 2}, seed=0)
        step = (n - 1) + n + n
        for i, g in enumerate(c.gates):
            pos = i % step
            diag = np.allclose(g.matrix, np.diag(np.diag(g.matrix)))
            assert diag == (pos < n - 1 or pos >= 2 * n - 1)

    def test_brickwork_variant(self):
        c = generate_circuit("rfim", 6, {"variant": "brickwork", "depth": 2, "h_max": 0.1}, seed=3)
        assert len(c) == 2 * (3 + 2)
        assert all(0 <= h <= 0.1 for h in c.params["fields"])


class TestUccsd:
    def test_generator_matches_jordan_wigner(self):
        n = 4
        a = [jw_annihilator(n, p) for p in range(n)]
        ad = [x.conj().T for x in a]
        for creators, annihilators in [([2], [0]), ([3], [1]), ([3, 2], [1, 0])]:
            t = np.eye(1 << n)
            for p in creators:
                t = t @ ad[p]
            for p in annihilators:
                t = t @ a[p]
            gen = excitation_generator(n, creators, annihilators)
            dense = sum(c * pauli_dense(s) for s, c in gen.items())
            np.testing.assert_allclose(dense, t - t.conj().T, atol=1e-14)

    @given(st.sampled_from(["XY", "ZX", "YZI", "XIY", "ZZZ", "IYI"]), st.floats(-1, 1))
    @settings(max_examples=30, deadline=None)
    def test_pauli_exponential(self, pauli, angle):
        n = len(pauli)
        u = np.eye(1 << n, dtype=complex)
        for g in pauli_exponential_gates(pauli, angle):
            u = np.stack([apply_dense(col, n, g.targets, g.matrix) for col in u.T], axis=1)
        np.testing.assert_allclose(u, scipy.linalg.expm(1j * angle * pauli_dense(pauli)), atol=1e-12)

    def test_circuit_equals_product_of_exponentials(self):
        n, seed = 4, 6
        c = generate_circuit("uccsd", n, {}, seed=seed)
        rng = np.random.default_rng(seed)
        occ, virt = range(2), range(2, 4)
        singles = [(i, a) for i in occ for a in virt]
        doubles = [(i, j, a, b) for i, j in combinations(occ, 2) for a, b in combinations(virt, 2)]
        t1 = rng.uniform(-0.3, 0.3, size=len(singles))
        t2 = rng.uniform(-0.05, 0.05, size=len(doubles))
        a = [jw_annihilator(n, p) for p in range(n)]
        psi = basis_vector(n, 0b0011)
        terms = [(a[x].conj().T @ a[i], th) for (i, x), th in zip(singles, t1)]
        terms += [(a[y].conj().T @ a[x].conj().T @ a[j] @ a[i], th) for (i, j, x, y), th in zip(doubles, t2)]
        for t, th in terms:
            psi = scipy.linalg.expm(th * (t - t.conj().T)) @ psi
        np.testing.assert_allclose(dense_simulate(c), psi, atol=1e-12)


class TestCircuit:
    @pytest.mark.parametrize("family", [f.value for f in Family])
    def test_deterministic_and_unitary(self, family):
        n = 6
        a = generate_circuit(family, n, None, seed=12)
        b = generate_circuit(family, n, None, seed=12)
        assert a.digest() == b.digest()
        assert all(g.unitarity_error() <= 1e-12 for g in a.gates)
        assert a.digest() != generate_circuit(family, n, None, seed=13).digest() or family == "tfim"

    @pytest.mark.parametrize("family", ["brickwork1d", "qaoa", "uccsd"])
    def test_json_round_trip(self, family):
        c = generate_circuit(family, 6, None, seed=3)
        back = Circuit.from_json(c.to_json())
        assert back.digest() == c.digest()
        assert back.seed == 3 and back.family == family
        for g, h in zip(c.gates, back.gates):
            np.testing.assert_array_equal(g.matrix, h.matrix)

    def test_cz_diag(self):
        assert np.array_equal(CZ, np.diag(np.diag(CZ)))
        assert np.allclose(H @ H, np.eye(2))
