import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import circuit_matrix, gate_unitary, pauli_matrix, random_clifford_gates, random_pauli
from lcu_parallel.clifford import (
    STAGE_ORDER,
    CliffordTableau,
    StagedCircuit,
    conjugate_pauli,
    constant_depth_cost,
    inverse_gates,
    normal_form_stages,
    synth_diagonalizing_clifford,
    tableau_from_circuit,
)
from lcu_parallel.errors import CommutationError, DimensionError, IndependenceError, PreconditionError, UnsupportedGateError
from lcu_parallel.pauli import PauliString, multiply, symplectic_product

P = PauliString.from_str


def random_tableau(rng, n):
    return tableau_from_circuit(random_clifford_gates(rng, n, 4 * n * n + 4), n)


def random_parallel_set(rng, n, k):
    """Images of Z_0..Z_{k-1} under a random Clifford: commuting and independent."""
    t = random_tableau(rng, n)
    return [t.image_of_z(q).unsigned() for q in rng.sample(range(n), k)]


def test_tableau_basics():
    assert tableau_from_circuit([], 3) == CliffordTableau.identity(3)
    t = tableau_from_circuit([("H", (0,))], 1)
    assert str(t.image_of_x(0)) == "Z" and str(t.image_of_z(0)) == "X"
    assert t.symplectic_matrix.to_strings() == ["01", "10"]
    with pytest.raises(UnsupportedGateError):
        tableau_from_circuit([("T", (0,))], 1)


def test_conjugation_matches_dense_on_six_qubits():
    rng = random.Random(21)
    gates = random_clifford_gates(rng, 6, 50)
    t = tableau_from_circuit(gates, 6)
    u = circuit_matrix(gates, 6)
    assert t.is_symplectic()
    for _ in range(20):
        p = random_pauli(rng, 6)
        q = conjugate_pauli(t, p)
        assert np.allclose(u @ pauli_matrix(p) @ u.conj().T, pauli_matrix(q))


@pytest.mark.parametrize("kind,qubits", [("H", (0,)), ("S", (1,)), ("X", (0,)), ("Z", (1,)), ("CNOT", (0, 1)), ("CNOT", (1, 0)), ("CZ", (0, 1))])
def test_single_gate_conjugation_exhaustive(kind, qubits):
    t = tableau_from_circuit([(kind, qubits)], 2)
    u = gate_unitary(kind, qubits, 2)
    for a in "IXYZ":
        for b in "IXYZ":
            p = P(a + b)
            assert np.allclose(u @ pauli_matrix(p) @ u.conj().T, pauli_matrix(conjugate_pauli(t, p)))


def test_cnot_conjugation_examples():
    t = tableau_from_circuit([("CNOT", (0, 1))], 2)
    assert conjugate_pauli(t, P("XX")) == P("XI")
    assert conjugate_pauli(t, P("ZZ")) == P("IZ")
    assert conjugate_pauli(CliffordTableau.identity(2), P("-YX")) == P("-YX")
    with pytest.raises(DimensionError):
        conjugate_pauli(t, P("X"))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.randoms(use_true_random=False))
def test_conjugation_is_a_homomorphism(n, rnd):
    t = random_tableau(rnd, n)
    p, q = random_pauli(rnd, n), random_pauli(rnd, n)
    cp, cq = conjugate_pauli(t, p), conjugate_pauli(t, q)
    assert symplectic_product(p, q) == symplectic_product(cp, cq)
    if symplectic_product(p, q) == 0:
        assert conjugate_pauli(t, multiply(p, q)) == multiply(cp, cq)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.randoms(use_true_random=False))
def test_inverse_and_composition(n, rnd):
    gates = random_clifford_gates(rnd, n, 30)
    t = tableau_from_circuit(gates, n)
    assert t.then(tableau_from_circuit(inverse_gates(gates), n)) == CliffordTableau.identity(n)
    more = random_clifford_gates(rnd, n, 10)
    assert t.then(tableau_from_circuit(more, n)) == tableau_from_circuit(gates + more, n)


def test_synthesis_examples():
    gates, signs = synth_diagonalizing_clifford([P("ZI"), P("IZ")])
    assert gates == [] and signs == [1, 1]
    gates, signs = synth_diagonalizing_clifford([P("X")])
    assert gates == [("H", (0,))] and signs == [1]
    paulis = [P("XX"), P("ZZ")]
    gates, signs = synth_diagonalizing_clifford(paulis)
    t = tableau_from_circuit(gates, 2)
    assert [conjugate_pauli(t, p) for p in paulis] == [P("ZI"), P("IZ")]
    assert set(k for k, _ in gates) <= {"H", "S", "CNOT", "CZ"}


def test_synthesis_rejects_bad_sets():
    with pytest.raises(CommutationError) as exc:
        synth_diagonalizing_clifford([P("XI"), P("ZI")])
    assert exc.value.pair == (0, 1)
    with pytest.raises(IndependenceError) as exc:
        synth_diagonalizing_clifford([P("ZZ"), P("ZI"), P("IZ")])
    assert exc.value.index == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))), st.randoms(use_true_random=False))
def test_synthesis_signs_match_dense_oracle(nk, rnd):
    n, k = nk
    paulis = random_parallel_set(rnd, n, k)
    gates, signs = synth_diagonalizing_clifford(paulis)
    u = circuit_matrix(gates, n)
    for j, p in enumerate(paulis):
        target = PauliString.single(n, j, "Z", signs[j])
        assert np.allclose(u @ pauli_matrix(p) @ u.conj().T, pauli_matrix(target))


def test_normal_form_examples():
    assert normal_form_stages(CliffordTableau.identity(3)).stages == ()
    s = normal_form_stages(tableau_from_circuit([("CNOT", (0, 1))], 2))
    assert s.kinds() == ["CX"] and s.total_two_qubit_stages == 1
    s = normal_form_stages(tableau_from_circuit([("H", (0,))], 2))
    assert s.kinds() == ["H"]


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_normal_form_round_trip(n):
    rng = random.Random(n)
    for _ in range(25):
        t = random_tableau(rng, n)
        s = normal_form_stages(t)
        assert tableau_from_circuit(s.gates(), n) == t
        assert s.total_two_qubit_stages <= 3
        assert s.follows_stage_order()
        for kind, gates in s.stages:
            assert gates


def test_normal_form_matches_dense_unitary_up_to_phase():
    rng = random.Random(5)
    for _ in range(10):
        gates = random_clifford_gates(rng, 3, 25)
        s = normal_form_stages(tableau_from_circuit(gates, 3))
        u, v = circuit_matrix(gates, 3), circuit_matrix(s.gates(), 3)
        overlap = np.trace(u.conj().T @ v) / 8
        assert abs(abs(overlap) - 1) < 1e-9


def test_staged_circuit_rejects_mismatched_gate():
    with pytest.raises(PreconditionError):
        StagedCircuit(2, (("CX", (("H", (0,)),)),))


def test_constant_depth_cost_examples():
    ident = normal_form_stages(CliffordTableau.identity(4))
    c = constant_depth_cost(ident)
    assert (c.ancilla_qubits, c.resource_state_count, c.depth_units) == (12, 0, 0)
    one_cx = StagedCircuit(26, (("CX", (("CNOT", (0, 1)),)),))
    c = constant_depth_cost(one_cx, 26)
    assert (c.ancilla_qubits, c.resource_state_count, c.depth_units) == (78, 1, 4)
    gate_for = {"CX": ("CNOT", (0, 1)), "CZ": ("CZ", (0, 1)), "P": ("S", (0,)), "H": ("H", (0,))}
    full = StagedCircuit(2, tuple((k, (gate_for[k],)) for k in STAGE_ORDER))
    c = constant_depth_cost(full)
    assert (c.resource_state_count, c.depth_units) == (3, 16)
    assert constant_depth_cost(full, d_stage=2).depth_units == 10


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 12), st.randoms(use_true_random=False))
def test_depth_units_do_not_depend_on_n(n, rnd):
    s = normal_form_stages(random_tableau(rnd, n))
    c = constant_depth_cost(s)
    assert c.ancilla_qubits == 3 * n
    assert c.depth_units <= 4 * 3 + 4
