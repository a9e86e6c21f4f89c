"""Statevector and classical basis-state simulation for verifying built circuits.

Amplitude index bit ``q`` is qubit ``q`` (qubit 0 is the least significant
bit). States are batched as arrays of shape ``(batch, 2**n)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .circuits import Circuit, Gate
from .errors import CapacityError, RegisterMismatchError, UnsupportedGateError

DEFAULT_QUBIT_CAP = 22
FULL_MATRIX_LIMIT = 10
DEFAULT_TRIALS = 20
DEFAULT_TOLERANCE = 1e-9
_SQRT_HALF = 1.0 / np.sqrt(2.0)


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    @classmethod
    def zero(cls, n_qubits: int, qubit_cap: int = DEFAULT_QUBIT_CAP) -> StateVector:
        _check_cap(n_qubits, qubit_cap)
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int, qubit_cap: int = DEFAULT_QUBIT_CAP) -> StateVector:
        sv = cls.zero(n_qubits, qubit_cap)
        sv.amplitudes[0] = 0.0
        sv.amplitudes[index] = 1.0
        return sv

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise CapacityError(f"{n} qubits exceed the simulation cap of {cap}")


def _control_mask(idx: np.ndarray, controls: Sequence[tuple[int, int]]) -> np.ndarray:
    cmask = cval = 0
    for q, pol in controls:
        cmask |= 1 << q
        cval |= pol << q
    return (idx & cmask) == cval


def _pauli_masks(g: Gate) -> tuple[int, int, int]:
    xm = zm = 0
    y = 0
    for q, ch in zip(g.qubits, g.target):
        if ch in "XY":
            xm |= 1 << q
        if ch in "ZY":
            zm |= 1 << q
        y += ch == "Y"
    return xm, zm, y


def apply_gates(psi: np.ndarray, n: int, gates: Sequence[Gate]) -> np.ndarray:
    """Apply ``gates`` to a batch ``psi`` of shape ``(batch, 2**n)`` and return the result."""
    psi = np.array(psi, dtype=np.complex128, copy=True)
    if psi.ndim == 1:
        psi = psi[None, :]
    idx = np.arange(1 << n, dtype=np.int64)
    for g in gates:
        k = g.kind
        if k == "H":
            bit = 1 << g.qubits[0]
            lo = idx[(idx & bit) == 0]
            a0, a1 = psi[:, lo], psi[:, lo | bit]
            psi[:, lo] = (a0 + a1) * _SQRT_HALF
            psi[:, lo | bit] = (a0 - a1) * _SQRT_HALF
        elif k == "S":
            psi[:, (idx >> g.qubits[0]) & 1 == 1] *= 1j
        elif k == "Z":
            psi[:, (idx >> g.qubits[0]) & 1 == 1] *= -1
        elif k == "X":
            psi = psi[:, idx ^ (1 << g.qubits[0])]
        elif k == "CNOT":
            c, t = g.qubits
            psi = psi[:, idx ^ (((idx >> c) & 1) << t)]
        elif k == "CZ":
            a, b = g.qubits
            psi[:, ((idx >> a) & (idx >> b) & 1) == 1] *= -1
        elif k == "TOFFOLI":
            c1, c2, t = g.qubits
            psi = psi[:, idx ^ ((((idx >> c1) & (idx >> c2)) & 1) << t)]
        elif k == "MCP":
            xm, zm, y = _pauli_masks(g)
            hit = _control_mask(idx, g.controls)
            src = np.where(hit, idx ^ xm, idx)
            parity = np.bitwise_count(src & zm) & 1
            factor = np.where(hit, g.sign * (1j**y) * (1 - 2 * parity.astype(np.int64)), 1.0)
            psi = psi[:, src] * factor
        else:
            raise UnsupportedGateError(f"cannot simulate gate kind {k}")
    return psi


def apply_circuit(state: StateVector, circuit: Circuit, qubit_cap: int = DEFAULT_QUBIT_CAP) -> StateVector:
    if state.n_qubits != circuit.n_qubits:
        raise RegisterMismatchError(f"state has {state.n_qubits} qubits, circuit {circuit.n_qubits}")
    _check_cap(circuit.n_qubits, qubit_cap)
    out = apply_gates(state.amplitudes, circuit.n_qubits, circuit.gates)[0]
    return StateVector(circuit.n_qubits, out)


def circuit_unitary(circuit: Circuit, limit: int = FULL_MATRIX_LIMIT) -> np.ndarray:
    """Dense matrix ``U[out, in]`` by propagating every basis state."""
    n = circuit.n_qubits
    if n > limit:
        raise CapacityError(f"full-matrix simulation is limited to {limit} qubits, got {n}")
    dim = 1 << n
    cols = apply_gates(np.eye(dim, dtype=np.complex128), n, circuit.gates)
    return cols.T


def classical_outputs(circuit: Circuit, inputs: np.ndarray) -> np.ndarray:
    """Run a permutation circuit on integer basis states, vectorised over ``inputs``.

    Only X, CNOT, TOFFOLI and X-string MCP gates are allowed.
    """
    state = np.array(inputs, dtype=np.int64, copy=True)
    for g in circuit.gates:
        k = g.kind
        if k == "X":
            state ^= 1 << g.qubits[0]
        elif k == "CNOT":
            c, t = g.qubits
            state ^= ((state >> c) & 1) << t
        elif k == "TOFFOLI":
            c1, c2, t = g.qubits
            state ^= ((state >> c1) & (state >> c2) & 1) << t
        elif k == "MCP" and set(g.target) == {"X"}:
            xm = sum(1 << q for q in g.qubits)
            state ^= np.where(_control_mask(state, g.controls), xm, 0)
        else:
            raise UnsupportedGateError(f"{g} is not a classical permutation gate")
    return state


@dataclass(frozen=True)
class EquivalenceVerdict:
    equivalent: bool
    max_deviation: float
    trials: int
    ancilla_restored: bool
    min_ancilla_zero_probability: float
    seed: int
    tolerance: float
    shared_registers: tuple[str, ...]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shared_registers"] = list(self.shared_registers)
        return d


def _embedding(c: Circuit, registers: Sequence[str]) -> np.ndarray:
    """Circuit basis index for every basis index of the concatenated shared registers."""
    qubits = [q for r in registers for q in c.register(r)]
    s = np.arange(1 << len(qubits), dtype=np.int64)
    out = np.zeros_like(s)
    for pos, q in enumerate(qubits):
        out |= ((s >> pos) & 1) << q
    return out


def circuits_equivalent(
    c1: Circuit,
    c2: Circuit,
    shared_registers: Sequence[str] = ("index", "system"),
    trials: int = DEFAULT_TRIALS,
    tolerance: float = DEFAULT_TOLERANCE,
    seed: int = 0,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
) -> EquivalenceVerdict:
    """Compare two circuits on random states of their shared registers.

    Every other qubit starts in |0>. The verdict fails if the shared-register
    outputs overlap by less than ``1 - tolerance`` or if either circuit
    leaves its auxiliary qubits away from |0> with probability above
    ``tolerance``.
    """
    for r in shared_registers:
        if r not in c1.registers or r not in c2.registers:
            raise RegisterMismatchError(f"register {r!r} missing from one circuit")
        if c1.registers[r][1] != c2.registers[r][1]:
            raise RegisterMismatchError(f"register {r!r} has different sizes")
    _check_cap(max(c1.n_qubits, c2.n_qubits), qubit_cap)
    emb1, emb2 = _embedding(c1, shared_registers), _embedding(c2, shared_registers)
    rng = np.random.default_rng(seed)
    dim = len(emb1)
    states = rng.normal(size=(trials, dim)) + 1j * rng.normal(size=(trials, dim))
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    outs = []
    probs = []
    for c, emb in ((c1, emb1), (c2, emb2)):
        psi = np.zeros((trials, 1 << c.n_qubits), dtype=np.complex128)
        psi[:, emb] = states
        psi = apply_gates(psi, c.n_qubits, c.gates)
        out = psi[:, emb]
        outs.append(out)
        probs.append(np.sum(np.abs(out) ** 2, axis=1))
    overlap = np.abs(np.sum(np.conj(outs[0]) * outs[1], axis=1))
    deviation = float(np.max(np.abs(1.0 - overlap))) if trials else 0.0
    min_prob = float(min(np.min(p) for p in probs)) if trials else 1.0
    restored = min_prob >= 1.0 - tolerance
    return EquivalenceVerdict(
        equivalent=bool(deviation <= tolerance and restored),
        max_deviation=deviation,
        trials=trials,
        ancilla_restored=bool(restored),
        min_ancilla_zero_probability=min_prob,
        seed=seed,
        tolerance=tolerance,
        shared_registers=tuple(shared_registers),
    )
