import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import observables, pauli_matrix, random_observable
from lcu_parallel.circuits import (
    HAMMING_DEPTH_OFFSET,
    HAMMING_DEPTH_SLOPE,
    Circuit,
    Gate,
    QromTable,
    build_fanout,
    build_hamming_flag,
    build_qrom_parallel,
    build_qrom_serial,
    build_select_parallel,
    build_select_serial,
    diagonalize_controls,
    hamming_depth_bound,
    schedule_layers,
    synthesize_partition,
)
from lcu_parallel.errors import CapacityError, DimensionError, IndependenceError, ParseError
from lcu_parallel.gf2 import gf2_rank
from lcu_parallel.grouping import partition_parallel
from lcu_parallel.pauli import Observable
from lcu_parallel.sim import circuit_unitary, circuits_equivalent, classical_outputs


def g(kind, *qs):
    return Gate(kind, qs)


# ---------------------------------------------------------------- IR


def test_gate_text_round_trip():
    gates = [
        g("H", 0),
        g("CNOT", 2, 1),
        g("TOFFOLI", 0, 1, 2),
        Gate.mcp([(3, 1), (4, 0)], [0, 2], "XZ", -1),
        Gate.mcp([], [1], "Y"),
    ]
    for gate in gates:
        assert Gate.from_text(gate.to_text()) == gate
    assert gates[3].to_text() == "MCP sign=-1 controls=3:+,4:- target=XZ@0,2"


@pytest.mark.parametrize("line", ["FOO 1", "H 0 1", "CNOT 1 1", "MCP sign=2 controls=0:+ target=X@1", "MCP controls=0:+"])
def test_bad_gates_rejected(line):
    with pytest.raises(ParseError):
        Gate.from_text(line)


def test_circuit_validation():
    with pytest.raises(DimensionError):
        Circuit(2, [g("CNOT", 0, 2)])
    with pytest.raises(DimensionError):
        Circuit(4, registers={"a": (0, 3), "b": (2, 2)})
    c = Circuit(3, registers={"system": (0, 2), "index": (2, 1)})
    assert c.register("index") == [2]


def test_circuit_text_is_byte_stable():
    obs = random_observable(random.Random(1), 3, 6)
    c = build_select_parallel(obs)
    text = c.to_text()
    again = Circuit.from_text(text)
    assert again.to_text() == text
    assert again.gates == c.gates and again.registers == c.registers
    assert text.startswith("CIRCUIT n_qubits=")
    with pytest.raises(ParseError):
        Circuit.from_text("H 0\n")


# -------------------------------------------------------------- schedule


def test_schedule_examples():
    assert schedule_layers(Circuit(4, [g("CNOT", 0, 1), g("CNOT", 2, 3)])).depth == 1
    assert schedule_layers(Circuit(3, [g("CNOT", 0, 1), g("CNOT", 1, 2)])).depth == 2
    obs = Observable.from_strings([(1.0, "I" * i + "Z" + "I" * (7 - i)) for i in range(8)])
    assert schedule_layers(build_select_serial(obs)).t_depth == 8


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.randoms(use_true_random=False))
def test_schedule_layers_are_disjoint_and_ordered(n, rnd):
    kinds = ["H", "S", "CNOT", "TOFFOLI", "MCP"]
    gates = []
    for _ in range(rnd.randint(0, 30)):
        k = rnd.choice(kinds if n >= 3 else kinds[:2])
        if k in ("H", "S"):
            gates.append(g(k, rnd.randrange(n)))
        elif k == "CNOT":
            gates.append(g(k, *rnd.sample(range(n), 2)))
        elif k == "TOFFOLI":
            gates.append(g(k, *rnd.sample(range(n), 3)))
        else:
            a, b = rnd.sample(range(n), 2)
            gates.append(Gate.mcp([(a, rnd.randint(0, 1))], [b], "Z"))
    c = Circuit(n, gates)
    s = schedule_layers(c)
    pos = {}
    for li, layer in enumerate(s.layers):
        qs = [q for i in layer for q in gates[i].operands]
        assert len(qs) == len(set(qs))
        for i in layer:
            pos[i] = li
    assert sorted(pos) == list(range(len(gates)))
    for i, j in itertools.combinations(range(len(gates)), 2):
        if set(gates[i].operands) & set(gates[j].operands):
            assert pos[i] < pos[j]
    t_layers = sum(1 for layer in s.layers if any(gates[i].kind in ("TOFFOLI", "MCP") for i in layer))
    assert s.t_depth == t_layers


# ---------------------------------------------------------------- fanout


def test_fanout_examples():
    c = build_fanout(1, 1)
    assert c.gates == [g("CNOT", 0, 1)] and schedule_layers(c).depth == 1
    c = build_fanout(3, 4)
    assert schedule_layers(c).depth == 3 and c.n_qubits - 3 == 12
    c = build_fanout(2, 3)
    for j in range(4):
        assert classical_outputs(c, np.array([j]))[0] == j * (1 + 4 + 16 + 64)


@pytest.mark.parametrize("a,c", [(a, c) for a in range(1, 5) for c in range(1, 5)])
def test_fanout_depth_and_self_inverse(a, c):
    circ = build_fanout(a, c)
    assert schedule_layers(circ).depth == math.ceil(math.log2(c + 1))
    inputs = np.arange(1 << circ.n_qubits, dtype=np.int64)
    # forward then uncompute is the identity on every basis input
    undo = Circuit(circ.n_qubits, circ.gates + circ.gates[::-1])
    assert np.array_equal(classical_outputs(undo, inputs), inputs)


# ---------------------------------------------------------------- SELECT


def test_select_serial_examples():
    c = build_select_serial(Observable.from_strings([(1.0, "X")]))
    assert c.gates == [Gate.mcp([(1, 0)], [0], "X")]
    obs = Observable.from_strings([(1.0, s) for s in ("XI", "IX", "ZZ", "YI")])
    c = build_select_serial(obs)
    patterns = [tuple(pol for _, pol in gate.controls) for gate in c.gates]
    assert patterns == [(0, 0), (1, 0), (0, 1), (1, 1)]


def select_oracle(obs):
    """Block-diagonal sum over index values of sign_j P_j, identity on unused patterns."""
    n, a = obs.n_qubits, obs.index_width
    blocks = []
    for j in range(1 << a):
        if j < len(obs) and not obs.terms[j].pauli.is_identity():
            t = obs.terms[j]
            blocks.append(t.unitary_sign * pauli_matrix(t.pauli))
        else:
            blocks.append(np.eye(1 << n))
    # system qubits are the low bits, so the index selects a block of the full matrix
    u = np.zeros((1 << (n + a),) * 2, dtype=complex)
    for j, b in enumerate(blocks):
        s = slice(j << n, (j + 1) << n)
        u[s, s] = b
    return u


@pytest.mark.parametrize("seed", range(8))
def test_select_serial_matches_block_oracle(seed):
    obs = random_observable(random.Random(seed), 3, 5)
    assert np.allclose(circuit_unitary(build_select_serial(obs)), select_oracle(obs))


def test_select_parallel_single_set_is_serial():
    obs = Observable.from_strings([(1.0, "Z")])
    assert build_select_parallel(obs).gates == build_select_serial(obs).gates


def test_select_parallel_t_depth_example():
    obs = Observable.from_strings([(1.0, "ZZ"), (1.0, "ZI"), (1.0, "IZ")])
    assert schedule_layers(build_select_parallel(obs)).t_depth == 2
    assert schedule_layers(build_select_serial(obs)).t_depth == 3


def test_select_parallel_copies_checked():
    obs = Observable.from_strings([(1.0, "ZI"), (1.0, "IZ")])
    part, _ = partition_parallel(obs)
    with pytest.raises(CapacityError):
        build_select_parallel(obs, part, copies=1)
    c = build_select_parallel(obs, part, copies=2)
    assert set(c.registers) == {"system", "index", "copy1"}


@settings(max_examples=40, deadline=None)
@given(observables(max_n=4, max_terms=8))
def test_select_parallel_equivalent_to_serial(obs):
    if all(t.pauli.is_identity() for t in obs.terms):
        return
    part, _ = partition_parallel(obs)
    par = build_select_parallel(obs, part, synthesize_partition(obs, part))
    ser = build_select_serial(obs)
    v = circuits_equivalent(ser, par, trials=6, seed=3)
    assert v.equivalent, v
    assert schedule_layers(par).t_depth <= schedule_layers(ser).t_depth


def test_select_parallel_full_matrix_on_shared_registers():
    """Restrict the parallel unitary to auxiliaries in |0> and compare with the serial matrix."""
    obs = Observable.from_strings([(0.5, "ZZ"), (-0.3, "XX"), (0.2, "-YY"), (0.1, "ZI")])
    ser, par = build_select_serial(obs), build_select_parallel(obs)
    assert par.n_qubits <= 10
    u_par = circuit_unitary(par)
    shared = par.register("system") + par.register("index")
    idx = np.zeros(1 << len(shared), dtype=np.int64)
    for pos, q in enumerate(shared):
        idx |= ((np.arange(len(idx)) >> pos) & 1) << q
    assert np.allclose(u_par[np.ix_(idx, idx)], circuit_unitary(ser))


# ------------------------------------------------------------------ QROM


def test_qrom_serial_examples():
    c = build_qrom_serial(QromTable(1, 1, ((0, 1), (1, 0))))
    assert c.gates == [Gate.mcp([(0, 0)], [1], "X")]
    # four-entry pattern: positive controls on address bits {1,2}, {0,2}, {1,3}, {2,3}
    table = QromTable(4, 4, ((0b0110, 0b1000), (0b0101, 0b0100), (0b1010, 0b0010), (0b1100, 0b0001)))
    c = build_qrom_serial(table)
    matrix = [[pol for _, pol in gate.controls] for gate in c.gates]
    assert matrix == [[0, 1, 1, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]]
    assert [gate.qubits for gate in c.gates] == [(7,), (6,), (5,), (4,)]
    # these address strings are GF(2)-dependent: 0110 + 1010 = 1100
    assert gf2_rank([a for a, _ in table.entries]) == 3
    check_qrom(table)


def check_qrom(table):
    w = table.address_width
    inputs = np.arange(1 << w, dtype=np.int64)
    ser = classical_outputs(build_qrom_serial(table), inputs)
    assert np.array_equal(ser, inputs | (np.array([table.lookup(a) for a in inputs]) << w))
    par = classical_outputs(build_qrom_parallel(table), inputs)
    assert np.array_equal(par, ser)


@pytest.mark.parametrize("seed", range(6))
def test_qrom_random_width_three(seed):
    rng = random.Random(seed)
    addrs = rng.sample(range(8), rng.randint(1, 8))
    check_qrom(QromTable(3, 2, tuple((a, rng.randrange(4)) for a in addrs)))


def test_qrom_table_validation():
    with pytest.raises(ParseError):
        QromTable(2, 1, ((1, 1), (1, 0)))
    with pytest.raises(DimensionError):
        QromTable(2, 1, ((4, 1),))


def test_diagonalize_controls_examples():
    c, t = diagonalize_controls([0b01, 0b10], 2)
    assert c.gates == [] and t == [0b01, 0b10]
    c, t = diagonalize_controls([0b11, 0b10], 2)  # bit strings 11 and 01
    assert len(c.gates) == 1 and t == [0b01, 0b10]
    with pytest.raises(IndependenceError):
        diagonalize_controls([0b11, 0b01, 0b10], 2)
    with pytest.raises(IndependenceError):
        diagonalize_controls([0], 2)


def test_diagonalize_controls_conjugation_exhaustive():
    """C^-1 . (serial gates with unit patterns) . C activates on exactly the original addresses."""
    addrs = [0b0111, 0b1010, 0b0011, 0b1111]
    c, transformed = diagonalize_controls(addrs, 4)
    assert all(v and v & (v - 1) == 0 for v in transformed)
    inputs = np.arange(16, dtype=np.int64)
    mapped = classical_outputs(c, inputs)
    for r, (addr, unit) in enumerate(zip(addrs, transformed)):
        assert np.array_equal(mapped == unit, inputs == addr)
    back = classical_outputs(Circuit(4, list(reversed(c.gates))), mapped)
    assert np.array_equal(back, inputs)


def test_hamming_flag_examples():
    assert build_hamming_flag(1).gates == [g("CNOT", 0, 1)]
    for a in (2, 5):
        c = build_hamming_flag(a)
        inputs = np.arange(1 << a, dtype=np.int64)
        out = classical_outputs(c, inputs)
        want = inputs | ((np.bitwise_count(inputs) == 1).astype(np.int64) << a)
        assert np.array_equal(out, want)


@pytest.mark.parametrize("a", [1, 2, 3, 4, 7, 8, 9, 16, 31, 64])
def test_hamming_flag_depth_bound(a):
    depth = schedule_layers(build_hamming_flag(a)).depth
    assert depth <= hamming_depth_bound(a)
    if a > 1:
        assert hamming_depth_bound(a) == HAMMING_DEPTH_SLOPE * math.ceil(math.log2(a)) + HAMMING_DEPTH_OFFSET


def test_qrom_parallel_unit_addresses_and_single_entry():
    check_qrom(QromTable(3, 3, ((1, 5), (2, 3), (4, 6))))
    c = build_qrom_parallel(QromTable(1, 1, ((1, 1),)))
    assert all(gate.kind != "TOFFOLI" for gate in c.gates)
    check_qrom(QromTable(1, 1, ((1, 1),)))


def test_qrom_parallel_width_four_full_set_truth_table():
    table = QromTable(4, 4, ((0b0111, 0b0001), (0b1010, 0b0010), (0b0011, 0b0100), (0b1111, 0b1000)))
    check_qrom(table)


@pytest.mark.xfail(strict=True, reason="flag, fanout and uncompute cost more T-layers than four serial gates")
def test_qrom_parallel_width_four_t_depth_below_serial():
    table = QromTable(4, 4, ((0b0111, 0b0001), (0b1010, 0b0010), (0b0011, 0b0100), (0b1111, 0b1000)))
    assert schedule_layers(build_qrom_parallel(table)).t_depth < schedule_layers(build_qrom_serial(table)).t_depth


def test_qrom_parallel_beats_serial_t_depth_at_width_eight():
    table = QromTable(8, 8, tuple((((1 << i) | (1 << (i + 1) % 8)) ^ (1 if i == 7 else 0), 1 << i) for i in range(8)))
    assert gf2_rank([a for a, _ in table.entries]) == 8
    par, ser = schedule_layers(build_qrom_parallel(table)), schedule_layers(build_qrom_serial(table))
    assert par.t_depth < ser.t_depth
    check_qrom(table)
