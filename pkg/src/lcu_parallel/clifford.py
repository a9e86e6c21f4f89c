"""Clifford tableaux, diagonalising synthesis and staged normal forms.

A tableau stores, for each generator ``X_0..X_{n-1}, Z_0..Z_{n-1}``, its
image ``U g U^dagger`` as a signed :class:`PauliString`. Gate updates follow
the Aaronson-Gottesman rules, with the sign conventions cross-checked
against dense matrices in the test-suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CommutationError,
    DimensionError,
    IndependenceError,
    PhaseError,
    PreconditionError,
    UnsupportedGateError,
)
from .gf2 import BitMatrix, Gf2Basis, gf2_inv, gf2_matmul
from .pauli import PauliString, multiply_with_phase, symplectic_product

CLIFFORD_KINDS = frozenset({"H", "S", "X", "Z", "CNOT", "CZ"})

STAGE_ORDER = ("CX", "CZ", "P", "H", "CZ", "P", "H")
TWO_QUBIT_STAGES = frozenset({"CX", "CZ"})
_STAGE_GATES = {"CX": {"CNOT"}, "CZ": {"CZ"}, "P": {"S", "Z"}, "H": {"H"}}

# Clifford gates are plain (kind, qubits) tuples here so this module does not
# depend on the circuit IR; circuits.Gate instances are accepted too.


def _as_pair(gate) -> tuple[str, tuple[int, ...]]:
    if isinstance(gate, tuple):
        kind, qubits = gate
        return kind, tuple(qubits)
    return gate.kind, tuple(gate.qubits)


def conjugate_by_gate(x: int, z: int, r: int, kind: str, qubits: Sequence[int]) -> tuple[int, int, int]:
    """Image ``G P G^dagger`` of the Pauli ``(-1)^r X^x Z^z``-with-Y-letters under one gate."""
    if kind == "H":
        (q,) = qubits
        xq, zq = (x >> q) & 1, (z >> q) & 1
        r ^= xq & zq
        if xq != zq:
            x ^= 1 << q
            z ^= 1 << q
    elif kind == "S":
        (q,) = qubits
        xq, zq = (x >> q) & 1, (z >> q) & 1
        r ^= xq & zq
        z ^= xq << q
    elif kind == "X":
        (q,) = qubits
        r ^= (z >> q) & 1
    elif kind == "Z":
        (q,) = qubits
        r ^= (x >> q) & 1
    elif kind == "CNOT":
        c, t = qubits
        xc, zc, xt, zt = (x >> c) & 1, (z >> c) & 1, (x >> t) & 1, (z >> t) & 1
        r ^= xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        z ^= zt << c
    elif kind == "CZ":
        a, b = qubits
        for k, q in (("H", (b,)), ("CNOT", (a, b)), ("H", (b,))):
            x, z, r = conjugate_by_gate(x, z, r, k, q)
    else:
        raise UnsupportedGateError(f"{kind} is not a supported Clifford gate")
    return x, z, r


def conjugate_pauli_by_gates(p: PauliString, gates: Iterable) -> PauliString:
    x, z, r = p.x, p.z, 1 if p.sign < 0 else 0
    for g in gates:
        kind, qubits = _as_pair(g)
        x, z, r = conjugate_by_gate(x, z, r, kind, qubits)
    return PauliString(p.n_qubits, x, z, -1 if r else 1)


@dataclass(frozen=True)
class CliffordTableau:
    n_qubits: int
    xs: tuple[int, ...]
    zs: tuple[int, ...]
    phases: tuple[int, ...]

    @classmethod
    def identity(cls, n: int) -> CliffordTableau:
        return cls(n, tuple(1 << i for i in range(n)) + (0,) * n, (0,) * n + tuple(1 << i for i in range(n)), (0,) * (2 * n))

    def images(self) -> list[PauliString]:
        return [
            PauliString(self.n_qubits, x, z, -1 if r else 1)
            for x, z, r in zip(self.xs, self.zs, self.phases)
        ]

    def image_of_x(self, q: int) -> PauliString:
        return self.images()[q]

    def image_of_z(self, q: int) -> PauliString:
        return self.images()[self.n_qubits + q]

    @property
    def symplectic_matrix(self) -> BitMatrix:
        """Row ``g`` is the image of generator ``g`` as ``x | z << n``."""
        n = self.n_qubits
        return BitMatrix(tuple(x | (z << n) for x, z in zip(self.xs, self.zs)), 2 * n)

    @property
    def phase_bits(self) -> tuple[int, ...]:
        return self.phases

    def apply_gate(self, kind: str, qubits: Sequence[int]) -> CliffordTableau:
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise DimensionError(f"qubit {q} outside a {self.n_qubits}-qubit tableau")
        rows = [conjugate_by_gate(x, z, r, kind, qubits) for x, z, r in zip(self.xs, self.zs, self.phases)]
        xs, zs, ps = zip(*rows) if rows else ((), (), ())
        return CliffordTableau(self.n_qubits, tuple(xs), tuple(zs), tuple(ps))

    def is_symplectic(self) -> bool:
        imgs = self.images()
        n = self.n_qubits
        for i in range(2 * n):
            for j in range(i + 1, 2 * n):
                expected = 1 if j == i + n else 0
                if symplectic_product(imgs[i], imgs[j]) != expected:
                    return False
        return True

    def then(self, other: CliffordTableau) -> CliffordTableau:
        """Tableau of applying ``self`` first and ``other`` second."""
        imgs = [conjugate_pauli(other, p) for p in self.images()]
        return _from_images(self.n_qubits, imgs)


def _from_images(n: int, images: Sequence[PauliString]) -> CliffordTableau:
    return CliffordTableau(
        n,
        tuple(p.x for p in images),
        tuple(p.z for p in images),
        tuple(1 if p.sign < 0 else 0 for p in images),
    )


def tableau_from_circuit(gates: Iterable, n_qubits: int) -> CliffordTableau:
    t = CliffordTableau.identity(n_qubits)
    for g in gates:
        kind, qubits = _as_pair(g)
        if kind not in CLIFFORD_KINDS:
            raise UnsupportedGateError(f"{kind} is not a Clifford gate")
        t = t.apply_gate(kind, qubits)
    return t


def conjugate_pauli(t: CliffordTableau, p: PauliString) -> PauliString:
    """``U p U^dagger`` with the sign tracked exactly."""
    if t.n_qubits != p.n_qubits:
        raise DimensionError(f"tableau on {t.n_qubits} qubits, Pauli on {p.n_qubits}")
    n = p.n_qubits
    imgs = t.images()
    acc = PauliString.identity(n)
    # p = sign * i^{|x&z|} * prod X^x * prod Z^z
    k = (p.x & p.z).bit_count() + (2 if p.sign < 0 else 0)
    for q in range(n):
        if (p.x >> q) & 1:
            acc, dk = multiply_with_phase(acc, imgs[q])
            k += dk
    for q in range(n):
        if (p.z >> q) & 1:
            acc, dk = multiply_with_phase(acc, imgs[n + q])
            k += dk
    k %= 4
    if k & 1:
        raise PhaseError("conjugation produced an imaginary phase; tableau is inconsistent")
    return acc if k == 0 else acc.negate()


def inverse_gates(gates: Sequence) -> list[tuple[str, tuple[int, ...]]]:
    """Gate list of the inverse circuit; ``S^dagger`` is emitted as ``S`` then ``Z``."""
    out: list[tuple[str, tuple[int, ...]]] = []
    for g in reversed(list(gates)):
        kind, qubits = _as_pair(g)
        if kind == "S":
            out.append(("S", qubits))
            out.append(("Z", qubits))
        elif kind in CLIFFORD_KINDS:
            out.append((kind, qubits))
        else:
            raise UnsupportedGateError(f"{kind} is not a Clifford gate")
    return out


# ---------------------------------------------------------------- synthesis


def audit_parallel_set(paulis: Sequence[PauliString]) -> None:
    """Raise unless the Paulis pairwise commute and are linearly independent."""
    if not paulis:
        return
    n = paulis[0].n_qubits
    for p in paulis:
        if p.n_qubits != n:
            raise DimensionError("Paulis in a set must share the qubit count")
    if len(paulis) > n:
        raise IndependenceError(f"{len(paulis)} Paulis cannot be independent and commuting on {n} qubits", index=n)
    for i in range(len(paulis)):
        for j in range(i + 1, len(paulis)):
            if symplectic_product(paulis[i], paulis[j]):
                raise CommutationError(f"elements {i} and {j} anticommute", pair=(i, j))
    basis = Gf2Basis()
    for i, p in enumerate(paulis):
        if not basis.add(p.symplectic_vector()):
            raise IndependenceError(f"element {i} depends on the preceding elements", index=i)


def synth_diagonalizing_clifford(paulis: Sequence[PauliString]) -> tuple[list[tuple[str, tuple[int, ...]]], list[int]]:
    """Clifford circuit mapping element ``j`` to ``s_j Z_j`` under conjugation.

    Returns ``(gates, signs)``. Gates use only H, S, CNOT and CZ. Input signs
    are ignored (elements are treated as unsigned), so ``s_j`` is the sign
    picked up by the unsigned element.
    """
    audit_parallel_set(paulis)
    if not paulis:
        return [], []
    n = paulis[0].n_qubits
    cur = [[p.x, p.z, 0] for p in paulis]
    gates: list[tuple[str, tuple[int, ...]]] = []

    def emit(kind, *qubits):
        gates.append((kind, qubits))
        for row in cur:
            row[0], row[1], row[2] = conjugate_by_gate(row[0], row[1], row[2], kind, qubits)

    for j in range(len(paulis)):
        # single-qubit basis changes on qubits >= j turn the tail of element j Z-type
        for q in range(j, n):
            xq, zq = (cur[j][0] >> q) & 1, (cur[j][1] >> q) & 1
            if xq and zq:
                emit("S", q)
            if xq:
                emit("H", q)
        tail = [q for q in range(j, n) if (cur[j][1] >> q) & 1]
        if not tail:  # excluded by the independence audit
            raise IndependenceError(f"element {j} is dependent", index=j)
        pivot = tail[0]
        for q in tail[1:]:
            emit("CNOT", q, pivot)
        if pivot != j:
            emit("CNOT", j, pivot)
            emit("CNOT", pivot, j)
        # Z components on already-fixed qubits i < j
        for i in range(j):
            if (cur[j][1] >> i) & 1:
                emit("CNOT", i, j)
    signs = []
    for j, (x, z, r) in enumerate(cur):
        if x or z != 1 << j:
            raise PreconditionError(f"synthesis failed to diagonalise element {j}")
        signs.append(-1 if r else 1)
    return gates, signs


# ------------------------------------------------------------- normal form


@dataclass(frozen=True)
class StagedCircuit:
    n_qubits: int
    stages: tuple[tuple[str, tuple[tuple[str, tuple[int, ...]], ...]], ...]

    def __post_init__(self):
        for kind, gates in self.stages:
            allowed = _STAGE_GATES[kind]
            for g, _ in gates:
                if g not in allowed:
                    raise PreconditionError(f"gate {g} inside a {kind} stage")

    @property
    def total_two_qubit_stages(self) -> int:
        return sum(1 for kind, gates in self.stages if kind in TWO_QUBIT_STAGES and gates)

    @property
    def single_qubit_stage_count(self) -> int:
        return sum(1 for kind, gates in self.stages if kind not in TWO_QUBIT_STAGES and gates)

    def gates(self) -> list[tuple[str, tuple[int, ...]]]:
        return [g for _, gates in self.stages for g in gates]

    def kinds(self) -> list[str]:
        return [k for k, _ in self.stages]

    def follows_stage_order(self) -> bool:
        """Stage kinds form a subsequence of CX-CZ-P-H-CZ-P-H."""
        it = iter(STAGE_ORDER)
        return all(any(k == s for s in it) for k in self.kinds())


def _symplectic_columns(t: CliffordTableau) -> np.ndarray:
    """``2n x 2n`` matrix whose column ``g`` is the image of generator ``g``."""
    n = t.n_qubits
    m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    for g, (x, z) in enumerate(zip(t.xs, t.zs)):
        for q in range(n):
            m[q, g] = (x >> q) & 1
            m[n + q, g] = (z >> q) & 1
    return m


def _hadamard_block(n: int, qubits: Iterable[int]) -> np.ndarray:
    h = np.eye(2 * n, dtype=np.uint8)
    for q in qubits:
        h[q, q] = h[n + q, n + q] = 0
        h[q, n + q] = h[n + q, q] = 1
    return h


def _lower_block(gamma: np.ndarray) -> np.ndarray:
    n = gamma.shape[0]
    m = np.eye(2 * n, dtype=np.uint8)
    m[n:, :n] = gamma
    return m


def _cnot_layer(a: np.ndarray) -> list[tuple[str, tuple[int, ...]]]:
    """CNOT sequence realising ``x -> A x`` on X-type bits."""
    a = a.copy()
    n = a.shape[0]
    ops: list[tuple[int, int]] = []  # (source, target): row target ^= row source

    def add(src, dst):
        a[dst] ^= a[src]
        ops.append((src, dst))

    for c in range(n):
        if not a[c, c]:
            below = np.nonzero(a[c + 1 :, c])[0]
            if below.size == 0:
                raise IndependenceError("CNOT layer matrix is singular", index=c)
            add(c + 1 + int(below[0]), c)
        for r in np.nonzero(a[:, c])[0]:
            if r != c:
                add(c, int(r))
    # ops reduce A to I, so A is their product applied in reverse order
    return [("CNOT", (src, dst)) for src, dst in reversed(ops)]


def _diagonal_layer(gamma: np.ndarray) -> tuple[list, list]:
    n = gamma.shape[0]
    cz = [("CZ", (a, b)) for a in range(n) for b in range(a + 1, n) if gamma[a, b]]
    ph = [("S", (a,)) for a in range(n) if gamma[a, a]]
    return cz, ph


def _lagrangian_graph_form(w: np.ndarray, n: int) -> tuple[list[int], np.ndarray]:
    """Hadamard set ``T`` and symmetric ``Gamma`` with ``H_T W = {(u, Gamma u)}``.

    ``w`` is ``2n x n`` with columns spanning a Lagrangian subspace. Qubits
    whose X-rows are pivots of the X block keep their X row; the remaining
    qubits are Hadamard-swapped, which always leaves an invertible X block.
    """
    basis = Gf2Basis()
    keep = []
    for q in range(n):
        row = sum(int(b) << i for i, b in enumerate(w[q]))
        if basis.add(row):
            keep.append(q)
    hset = [q for q in range(n) if q not in keep]
    w2 = gf2_matmul(_hadamard_block(n, hset), w)
    gamma = gf2_matmul(w2[n:], gf2_inv(w2[:n]))
    if not np.array_equal(gamma, gamma.T):
        raise PreconditionError("tableau columns are not isotropic")
    return hset, gamma


def _pauli_fix(target: CliffordTableau, built: CliffordTableau) -> tuple[int, int]:
    """Pauli ``Q`` such that applying ``Q`` before ``built`` yields ``target``."""
    n = target.n_qubits
    qx = qz = 0
    for q in range(n):
        if target.phases[q] != built.phases[q]:
            qz |= 1 << q
        if target.phases[n + q] != built.phases[n + q]:
            qx |= 1 << q
    return qx, qz


def normal_form_stages(t: CliffordTableau) -> StagedCircuit:
    """Rewrite a Clifford as stages CX-CZ-P-H-CZ-P-H with at most three two-qubit stages.

    The symplectic part is factored as ``H_T L(G2) H_all L(G1) C(A)`` where
    ``C(A)`` is a CNOT layer and ``L(G)`` a CZ+S layer; a residual Pauli frame
    is absorbed into the two phase stages as Z gates. Empty stages are dropped
    and the two Hadamard stages fuse when nothing sits between them.
    """
    n = t.n_qubits
    m = _symplectic_columns(t)
    hset, gamma2 = _lagrangian_graph_form(m[:, n:], n)
    k = gf2_matmul(gf2_matmul(_hadamard_block(n, hset), _lower_block(gamma2)), _hadamard_block(n, range(n)))
    nmat = gf2_matmul(gf2_inv(k), m)
    if nmat[:n, n:].any():
        raise PreconditionError("normal form factorisation failed")
    a = nmat[:n, :n]
    gamma1 = gf2_matmul(nmat[n:, :n], gf2_inv(a))

    cx = _cnot_layer(a)
    cz1, p1 = _diagonal_layer(gamma1)
    h1 = [("H", (q,)) for q in range(n)]
    cz2, p2 = _diagonal_layer(gamma2)
    h2 = [("H", (q,)) for q in hset]

    built = tableau_from_circuit(cx + cz1 + p1 + h1 + cz2 + p2 + h2, n)
    if built.xs != t.xs or built.zs != t.zs:
        raise PreconditionError("normal form does not reproduce the symplectic matrix")
    qx, qz = _pauli_fix(t, built)
    if qx or qz:
        # push the frame through CX and CZ, then absorb into the phase stages
        frame = conjugate_pauli_by_gates(PauliString(n, qx, qz), cx + cz1)
        z1 = frame.z
        frame = conjugate_pauli_by_gates(PauliString(n, frame.x, 0), p1)
        z1 ^= frame.z
        # past the full Hadamard layer the remaining X part is Z-type and commutes with CZ
        z2 = frame.x
        p1 = p1 + [("Z", (q,)) for q in range(n) if (z1 >> q) & 1]
        p2 = p2 + [("Z", (q,)) for q in range(n) if (z2 >> q) & 1]

    stages = [("CX", cx), ("CZ", cz1), ("P", p1), ("H", h1), ("CZ", cz2), ("P", p2), ("H", h2)]
    if not cz2 and not p2:
        merged = sorted(set(range(n)) ^ set(hset))
        stages = stages[:3] + [("H", [("H", (q,)) for q in merged])]
    staged = StagedCircuit(n, tuple((kind, tuple(g)) for kind, g in stages if g))
    replay = tableau_from_circuit(staged.gates(), n)
    if replay != t:
        raise PreconditionError("normal form replay does not match the tableau")
    return staged


# -------------------------------------------------------------- cost model


@dataclass(frozen=True)
class ConstantDepthCost:
    ancilla_qubits: int
    depth_units: int
    resource_state_count: int


DEFAULT_STAGE_DEPTH = 4


def constant_depth_cost(staged: StagedCircuit, n_qubits: int | None = None, d_stage: int = DEFAULT_STAGE_DEPTH) -> ConstantDepthCost:
    """Depth/ancilla model for executing a staged Clifford by teleportation.

    Each non-empty two-qubit stage consumes one resource-state pair on
    ``3n`` ancilla and costs ``d_stage`` units (entangling round,
    measurement, feed-forward correction, state handoff, which includes
    regenerating the second resource state). Single-qubit stages cost one unit.
    """
    n = staged.n_qubits if n_qubits is None else n_qubits
    two = staged.total_two_qubit_stages
    return ConstantDepthCost(
        ancilla_qubits=3 * n,
        depth_units=d_stage * two + staged.single_qubit_stage_count,
        resource_state_count=two,
    )
