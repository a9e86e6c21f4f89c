import random
from functools import reduce

import numpy as np
import pytest
from hypothesis import strategies as st

from lcu_parallel.pauli import Observable, PauliString, PauliTerm

I2 = np.eye(2, dtype=complex)
MATS = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
GATE_MATS = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1, 1j]),
    "X": MATS["X"],
    "Z": MATS["Z"],
}


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix with qubit 0 as the least significant index bit."""
    mats = [MATS[ch] for ch in reversed(p.letters)]
    return p.sign * reduce(np.kron, mats, np.eye(1, dtype=complex))


def gate_unitary(kind, qubits, n) -> np.ndarray:
    """Independent dense construction of a Clifford gate by basis enumeration."""
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        if kind in GATE_MATS:
            q = qubits[0]
            b = (col >> q) & 1
            for nb in (0, 1):
                u[(col & ~(1 << q)) | (nb << q), col] += GATE_MATS[kind][nb, b]
        elif kind == "CNOT":
            c, t = qubits
            u[col ^ (((col >> c) & 1) << t), col] = 1
        elif kind == "CZ":
            a, b = qubits
            u[col, col] = -1 if (col >> a) & (col >> b) & 1 else 1
        else:
            raise ValueError(kind)
    return u


def circuit_matrix(gates, n) -> np.ndarray:
    u = np.eye(1 << n, dtype=complex)
    for kind, qs in gates:
        u = gate_unitary(kind, qs, n) @ u
    return u


def random_pauli(rng: random.Random, n: int, allow_sign=True) -> PauliString:
    s = "".join(rng.choice("IXYZ") for _ in range(n))
    if allow_sign and rng.random() < 0.5:
        s = "-" + s
    return PauliString.from_str(s)


def random_clifford_gates(rng: random.Random, n: int, count: int):
    gates = []
    for _ in range(count):
        kind = rng.choice(["H", "S", "X", "Z", "CNOT", "CZ"] if n > 1 else ["H", "S", "X", "Z"])
        if kind in ("CNOT", "CZ"):
            gates.append((kind, tuple(rng.sample(range(n), 2))))
        else:
            gates.append((kind, (rng.randrange(n),)))
    return gates


def random_observable(rng: random.Random, n: int, L: int) -> Observable:
    pairs = []
    for _ in range(L):
        p = random_pauli(rng, n)
        pairs.append((rng.choice((-1, 1)) * rng.uniform(0.05, 2.0), str(p)))
    return Observable.from_strings(pairs)


@st.composite
def pauli_strings(draw, n=None, min_n=1, max_n=4, signed=True):
    if n is None:
        n = draw(st.integers(min_n, max_n))
    x = draw(st.integers(0, (1 << n) - 1))
    z = draw(st.integers(0, (1 << n) - 1))
    sign = draw(st.sampled_from([1, -1])) if signed else 1
    return PauliString(n, x, z, sign)


@st.composite
def observables(draw, max_n=4, max_terms=8):
    n = draw(st.integers(1, max_n))
    L = draw(st.integers(1, max_terms))
    terms = []
    for _ in range(L):
        p = draw(pauli_strings(n=n))
        c = draw(st.floats(0.05, 2.0)) * draw(st.sampled_from([1, -1]))
        terms.append(PauliTerm(p, c))
    return Observable.from_terms(terms, n)


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, with any recorded measurements."""
    lines = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or rep.when not in ("call", "setup"):
                continue
            if outcome == "skipped" or rep.when == "call":
                name = nodeid.split("::")[-1]
                num = int(name.split("_")[2])
                extra = ", ".join(f"{k}={v}" for k, v in rep.user_properties)
                status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIPPED"}[outcome]
                lines.append((num, f"criterion {num}: {status}" + (f" ({extra})" if extra else "")))
    if lines:
        terminalreporter.section("acceptance")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
