"""Gate-level circuit IR, layer scheduling and SELECT/QROM builders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .clifford import StagedCircuit, inverse_gates, synth_diagonalizing_clifford
from .errors import CapacityError, DimensionError, IndependenceError, ParseError, PreconditionError
from .gf2 import Gf2Basis, bits_to_str, row_reduce
from .grouping import Partition, partition_parallel, partition_qrom_addresses
from .pauli import Observable, PauliString

GATE_KINDS = ("H", "S", "X", "Z", "CNOT", "CZ", "TOFFOLI", "MCP")
_ARITY = {"H": 1, "S": 1, "X": 1, "Z": 1, "CNOT": 2, "CZ": 2, "TOFFOLI": 3}
T_KINDS = frozenset({"TOFFOLI", "MCP"})


@dataclass(frozen=True)
class Gate:
    """One gate. For ``MCP`` the ``qubits`` field holds the target qubits,
    ``target`` the Pauli letters on them and ``controls`` the
    ``(qubit, polarity)`` pairs, polarity 1 for a positive control."""

    kind: str
    qubits: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    target: str = ""
    sign: int = 1

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ParseError(f"unknown gate kind {self.kind!r}")
        if self.kind == "MCP":
            if len(self.target) != len(self.qubits) or not self.qubits:
                raise ParseError("MCP target letters must match its target qubits")
            if self.sign not in (1, -1):
                raise ParseError("MCP sign must be +1 or -1")
        elif len(self.qubits) != _ARITY[self.kind]:
            raise ParseError(f"{self.kind} takes {_ARITY[self.kind]} qubits")
        ops = self.operands
        if len(set(ops)) != len(ops):
            raise ParseError(f"repeated operand in {self}")

    @classmethod
    def mcp(cls, controls: Iterable[tuple[int, int]], targets: Sequence[int], letters: str, sign: int = 1) -> Gate:
        return cls("MCP", tuple(targets), tuple((int(q), int(p)) for q, p in controls), letters, sign)

    @property
    def operands(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.controls) + tuple(self.qubits)

    @property
    def target_pauli(self) -> PauliString:
        return PauliString.from_str(("-" if self.sign < 0 else "") + self.target)

    @property
    def control_count(self) -> int:
        if self.kind == "TOFFOLI":
            return 2
        return len(self.controls)

    def to_text(self) -> str:
        if self.kind != "MCP":
            return " ".join([self.kind, *map(str, self.qubits)])
        ctrl = ",".join(f"{q}:{'+' if p else '-'}" for q, p in self.controls)
        tgt = f"{self.target}@{','.join(map(str, self.qubits))}"
        return f"MCP sign={'+1' if self.sign > 0 else '-1'} controls={ctrl} target={tgt}"

    @classmethod
    def from_text(cls, line: str) -> Gate:
        parts = line.split()
        kind = parts[0]
        if kind != "MCP":
            try:
                return cls(kind, tuple(int(p) for p in parts[1:]))
            except ValueError as exc:
                raise ParseError(f"bad gate line {line!r}") from exc
        fields = dict(p.split("=", 1) for p in parts[1:])
        try:
            sign = int(fields["sign"])
            controls = []
            if fields.get("controls"):
                for item in fields["controls"].split(","):
                    q, pol = item.split(":")
                    controls.append((int(q), 1 if pol == "+" else 0))
            letters, qs = fields["target"].split("@")
            return cls("MCP", tuple(int(q) for q in qs.split(",")), tuple(controls), letters, sign)
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad MCP line {line!r}") from exc

    def __str__(self):
        return self.to_text()


def _g(kind: str, *qubits: int) -> Gate:
    return Gate(kind, tuple(qubits))


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    registers: dict[str, tuple[int, int]] = field(default_factory=dict)
    # (gate position, text) comment markers, e.g. stage boundaries
    markers: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self):
        spans = sorted(self.registers.values())
        for (s1, n1), (s2, _) in zip(spans, spans[1:]):
            if s1 + n1 > s2:
                raise DimensionError("register ranges overlap")
        for start, size in spans:
            if start < 0 or start + size > self.n_qubits:
                raise DimensionError("register outside the circuit")
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        for q in g.operands:
            if not 0 <= q < self.n_qubits:
                raise DimensionError(f"operand {q} outside a {self.n_qubits}-qubit circuit")

    def append(self, g: Gate) -> None:
        self._check(g)
        self.gates.append(g)

    def extend(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.append(g)

    def mark(self, text: str) -> None:
        self.markers.append((len(self.gates), text))

    def register(self, name: str) -> list[int]:
        start, size = self.registers[name]
        return list(range(start, start + size))

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def to_text(self) -> str:
        lines = [f"CIRCUIT n_qubits={self.n_qubits}"]
        for name, (start, size) in self.registers.items():
            lines.append(f"REGISTER {name} {start} {size}")
        marks: dict[int, list[str]] = {}
        for pos, text in self.markers:
            marks.setdefault(pos, []).append(text)
        for i, g in enumerate(self.gates):
            lines.extend(f"# {t}" for t in marks.get(i, ()))
            lines.append(g.to_text())
        lines.extend(f"# {t}" for t in marks.get(len(self.gates), ()))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Circuit:
        lines = text.splitlines()
        if not lines or not lines[0].startswith("CIRCUIT n_qubits="):
            raise ParseError("missing CIRCUIT header", line=1)
        n = int(lines[0].split("=", 1)[1])
        registers: dict[str, tuple[int, int]] = {}
        gates: list[Gate] = []
        markers: list[tuple[int, str]] = []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            if line.startswith("# "):
                markers.append((len(gates), line[2:]))
            elif line.startswith("REGISTER "):
                _, name, start, size = line.split()
                registers[name] = (int(start), int(size))
            else:
                try:
                    gates.append(Gate.from_text(line))
                except ParseError as exc:
                    raise ParseError(str(exc), line=lineno) from exc
        return cls(n, gates, registers, markers)


def clifford_gates(pairs: Iterable[tuple[str, tuple[int, ...]]], qubit_map: Sequence[int] | None = None) -> list[Gate]:
    """Lift ``(kind, qubits)`` pairs into :class:`Gate` objects, optionally relabelling qubits."""
    out = []
    for kind, qs in pairs:
        if qubit_map is not None:
            qs = tuple(qubit_map[q] for q in qs)
        out.append(Gate(kind, tuple(qs)))
    return out


def staged_circuit_to_circuit(staged: StagedCircuit) -> Circuit:
    c = Circuit(staged.n_qubits, registers={"system": (0, staged.n_qubits)})
    for kind, gates in staged.stages:
        c.mark(f"stage {kind}")
        c.extend(clifford_gates(gates))
    return c


# ---------------------------------------------------------------- scheduling


@dataclass(frozen=True)
class LayerSchedule:
    layers: tuple[tuple[int, ...], ...]
    depth: int
    t_depth: int


def schedule_layers(c: Circuit) -> LayerSchedule:
    """As-soon-as-possible layering with T-bearing gates aligned by T-level.

    Gates sharing a qubit keep their program order. A TOFFOLI or MCP gate's
    T-level is the number of T-bearing gates on its longest dependency chain;
    all T-bearing gates of one level are placed in one common layer, so
    ``t_depth`` equals the critical T-path length.
    """
    gates = c.gates
    last: dict[int, int] = {}
    preds: list[list[int]] = []
    tlevel: list[int] = []
    for i, g in enumerate(gates):
        ps = {last[q] for q in g.operands if q in last}
        preds.append(sorted(ps))
        lvl = max((tlevel[p] for p in ps), default=0)
        tlevel.append(lvl + (1 if g.kind in T_KINDS else 0))
        for q in g.operands:
            last[q] = i
    # non-T gate at level l sorts after the T-gates of level l and before those of l+1
    order = sorted(
        range(len(gates)),
        key=lambda i: (tlevel[i], 0 if gates[i].kind in T_KINDS else 1, i),
    )
    layer = [0] * len(gates)
    k = 0
    while k < len(order):
        i = order[k]
        if gates[i].kind in T_KINDS:
            batch = []
            lvl = tlevel[i]
            while k < len(order) and gates[order[k]].kind in T_KINDS and tlevel[order[k]] == lvl:
                batch.append(order[k])
                k += 1
            slot = max((layer[p] + 1 for b in batch for p in preds[b]), default=0)
            for b in batch:
                layer[b] = slot
        else:
            layer[i] = max((layer[p] + 1 for p in preds[i]), default=0)
            k += 1
    depth = max(layer, default=-1) + 1
    buckets: list[list[int]] = [[] for _ in range(depth)]
    for i, l in enumerate(layer):
        buckets[l].append(i)
    t_layers = sum(1 for b in buckets if any(gates[i].kind in T_KINDS for i in b))
    return LayerSchedule(tuple(tuple(b) for b in buckets), depth, t_layers)


# ---------------------------------------------------------------- builders


def fanout_gates(registers: Sequence[Sequence[int]]) -> list[Gate]:
    """CNOT doubling tree copying ``registers[0]`` into every other register.

    Scheduled depth is ``ceil(log2(len(registers)))``.
    """
    holders = [0]
    nxt = 1
    gates: list[Gate] = []
    while nxt < len(registers):
        for h in list(holders):
            if nxt >= len(registers):
                break
            for src, dst in zip(registers[h], registers[nxt]):
                gates.append(_g("CNOT", src, dst))
            holders.append(nxt)
            nxt += 1
    return gates


def build_fanout(register_width: int, copies: int) -> Circuit:
    if register_width < 1 or copies < 1:
        raise PreconditionError("fanout needs a non-empty register and at least one copy")
    a = register_width
    regs = {"source": (0, a)}
    for m in range(1, copies + 1):
        regs[f"copy{m}"] = (a * m, a)
    c = Circuit(a * (copies + 1), registers=regs)
    c.extend(fanout_gates([list(range(a * m, a * m + a)) for m in range(copies + 1)]))
    return c


def index_controls(index_qubits: Sequence[int], value: int) -> list[tuple[int, int]]:
    return [(q, (value >> b) & 1) for b, q in enumerate(index_qubits)]


def _pauli_target(p: PauliString, system: Sequence[int]) -> tuple[list[int], str]:
    qs = p.support
    return [system[q] for q in qs], "".join(p.letters[q] for q in qs)


def build_select_serial(obs: Observable) -> Circuit:
    """One multi-controlled Pauli per non-identity term, controlled on the binary index."""
    n, a = obs.n_qubits, obs.index_width
    c = Circuit(n + a, registers={"system": (0, n), "index": (n, a)})
    system, index = c.register("system"), c.register("index")
    for j, term in enumerate(obs.terms):
        if term.pauli.is_identity():
            continue
        targets, letters = _pauli_target(term.pauli, system)
        c.append(Gate.mcp(index_controls(index, j), targets, letters, term.unitary_sign))
    return c


@dataclass(frozen=True)
class SetClifford:
    """Diagonalising Clifford for one parallel set: element ``r`` maps to ``signs[r] * Z_r``."""

    gates: tuple[tuple[str, tuple[int, ...]], ...]
    signs: tuple[int, ...]


def synthesize_partition(obs: Observable, partition: Partition) -> list[SetClifford]:
    out = []
    for s in partition.sets:
        paulis = [obs.terms[i].pauli.unsigned() for i in s.term_indices]
        gates, signs = synth_diagonalizing_clifford(paulis)
        out.append(SetClifford(tuple(gates), tuple(signs)))
    return out


def build_select_parallel(
    obs: Observable,
    partition: Partition | None = None,
    cliffords: Sequence[SetClifford] | None = None,
    copies: int | None = None,
) -> Circuit:
    """SELECT with the index fanned out so each parallel set costs one T-layer.

    ``copies`` counts the registers holding the index value (the index
    register itself plus ``copies - 1`` fanout targets); it defaults to the
    largest set size.
    """
    if partition is None:
        partition, _ = partition_parallel(obs)
    if cliffords is None:
        cliffords = synthesize_partition(obs, partition)
    if len(cliffords) != len(partition.sets):
        raise PreconditionError("one Clifford per parallel set is required")
    n, a = obs.n_qubits, obs.index_width
    need = max(partition.max_set_size, 1)
    copies = need if copies is None else copies
    if copies < need:
        raise CapacityError(f"{copies} index copies cannot serve a set of size {need}")
    if need > n:
        raise CapacityError(f"set of size {need} exceeds the {n}-qubit system register")
    regs = {"system": (0, n), "index": (n, a)}
    for m in range(1, copies):
        regs[f"copy{m}"] = (n + a * m, a)
    c = Circuit(n + a * copies, registers=regs)
    system = c.register("system")
    holders = [c.register("index")] + [c.register(f"copy{m}") for m in range(1, copies)]
    fan = fanout_gates(holders)
    c.mark("fanout")
    c.extend(fan)
    for g, (pset, cl) in enumerate(zip(partition.sets, cliffords)):
        if len(cl.signs) != len(pset):
            raise PreconditionError(f"Clifford {g} does not match its set")
        c.mark(f"set {g}")
        c.extend(clifford_gates(cl.gates, system))
        for r, (j, s) in enumerate(zip(pset.term_indices, cl.signs)):
            sign = s * obs.terms[j].unitary_sign
            c.append(Gate.mcp(index_controls(holders[r], j), [system[r]], "Z", sign))
        c.extend(clifford_gates(inverse_gates(cl.gates), system))
    c.mark("unfanout")
    c.extend(reversed(fan))
    return c


# --------------------------------------------------------------------- QROM


@dataclass(frozen=True)
class QromTable:
    address_width: int
    data_width: int
    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for addr, data in self.entries:
            if addr < 0 or addr >> self.address_width:
                raise DimensionError(f"address {addr} wider than {self.address_width} bits")
            if data < 0 or data >> self.data_width:
                raise DimensionError(f"data word {data} wider than {self.data_width} bits")
            if addr in seen:
                raise ParseError(f"duplicate address {bits_to_str(addr, self.address_width)}")
            seen.add(addr)

    def lookup(self, addr: int) -> int:
        return dict(self.entries).get(addr, 0)


def _x_string_gate(controls, output: Sequence[int], word: int) -> Gate | None:
    targets = [output[i] for i in range(len(output)) if (word >> i) & 1]
    if not targets:
        return None
    return Gate.mcp(controls, targets, "X" * len(targets))


def build_qrom_serial(table: QromTable) -> Circuit:
    w, d = table.address_width, table.data_width
    c = Circuit(w + d, registers={"address": (0, w), "output": (w, d)})
    address, output = c.register("address"), c.register("output")
    for addr, word in table.entries:
        g = _x_string_gate(index_controls(address, addr), output, word)
        if g is not None:
            c.append(g)
    return c


def diagonalize_controls(addresses: Sequence[int], width: int) -> tuple[Circuit, list[int]]:
    """CNOT circuit ``C`` on the address register with ``C|l> = |e_p>`` for every address.

    Each address becomes a distinct unit vector, so after ``C`` the serial
    control patterns have exactly one positive control.
    """
    basis = Gf2Basis()
    for i, addr in enumerate(addresses):
        if addr >> width:
            raise DimensionError(f"address {addr} wider than {width} bits")
        if not basis.add(addr):
            raise IndependenceError(f"address {i} is zero or depends on the preceding addresses", index=i)
    # rows are qubits, columns are addresses; row ops are CNOTs on the register
    rows = [sum(((addr >> q) & 1) << r for r, addr in enumerate(addresses)) for q in range(width)]
    _, log, _ = row_reduce(rows, len(addresses))
    c = Circuit(width, registers={"address": (0, width)})
    c.extend(_g("CNOT", src, dst) for src, dst in log)
    transformed = []
    for addr in addresses:
        v = addr
        for src, dst in log:
            v ^= ((v >> src) & 1) << dst
        transformed.append(v)
    return c, transformed


# Hamming-weight flag: scheduled depth <= SLOPE * ceil(log2 a) + OFFSET
HAMMING_DEPTH_SLOPE = 4
HAMMING_DEPTH_OFFSET = 3


def hamming_workspace_size(width: int) -> int:
    return 2 * (width - 1)


def _hamming_parts(inputs: Sequence[int], flag: int, work: Sequence[int]) -> tuple[list[Gate], Gate, list[Gate]]:
    """Compute gates, flag gate and uncompute gates for ``flag ^= [popcount(inputs) == 1]``.

    A balanced tree keeps, per internal node, the parity of its subtree and
    the AND of its two children's parities. The weight is at least two
    exactly when some node has both children odd, so the flag is
    ``root parity AND NOT(any node AND)``. Parities are CNOT-only and all
    ANDs are independent Toffolis, giving one T-layer each way.
    """
    if len(inputs) == 1:
        return [], _g("CNOT", inputs[0], flag), []
    free = list(work)
    nodes = list(inputs)
    parity_gates: list[Gate] = []
    and_gates: list[Gate] = []
    ands: list[int] = []
    while len(nodes) > 1:
        nxt = []
        for i in range(0, len(nodes) - 1, 2):
            left, right = nodes[i], nodes[i + 1]
            p, u = free.pop(0), free.pop(0)
            parity_gates += [_g("CNOT", left, p), _g("CNOT", right, p)]
            and_gates.append(_g("TOFFOLI", left, right, u))
            ands.append(u)
            nxt.append(p)
        if len(nodes) % 2:
            nxt.append(nodes[-1])
        nodes = nxt
    compute = parity_gates + and_gates
    flag_gate = Gate.mcp([(nodes[0], 1)] + [(u, 0) for u in ands], [flag], "X")
    return compute, flag_gate, list(reversed(compute))


def build_hamming_flag(width: int) -> Circuit:
    """Flag qubit ``^= [popcount(input) == 1]`` with the workspace returned to zero."""
    if width < 1:
        raise PreconditionError("Hamming flag needs at least one input bit")
    ws = hamming_workspace_size(width)
    c = Circuit(width + 1 + ws, registers={"input": (0, width), "flag": (width, 1), "work": (width + 1, ws)})
    compute, flag_gate, uncompute = _hamming_parts(c.register("input"), width, c.register("work"))
    c.extend(compute)
    c.append(flag_gate)
    c.extend(uncompute)
    return c


def hamming_depth_bound(width: int) -> int:
    return HAMMING_DEPTH_SLOPE * math.ceil(math.log2(width)) + HAMMING_DEPTH_OFFSET if width > 1 else 1


def build_qrom_parallel(table: QromTable, address_sets: Sequence[Sequence[int]] | None = None) -> Circuit:
    """QROM where each independent address set loads its words in one Toffoli layer.

    Per set: diagonalise the controls, copy the address register, compute
    the weight-one flag, fan the flag out, apply one Toffoli (or doubly
    controlled X-string) per entry, then undo everything. The zero address
    and singleton sets fall back to the serial gate. ``address_sets`` hold
    indices into ``table.entries``.
    """
    w, d = table.address_width, table.data_width
    entries = list(table.entries)
    if address_sets is None:
        qp = partition_qrom_addresses([a for a, _ in entries], w)
        address_sets = [list(s) for s in qp.sets]
        if qp.zero_index is not None:
            address_sets.append([qp.zero_index])
    covered = sorted(i for s in address_sets for i in s)
    if covered != list(range(len(entries))):
        raise PreconditionError("address sets must cover every table entry exactly once")
    multi = [s for s in address_sets if len(s) > 1]
    k_max = max((len(s) for s in multi), default=0)
    if k_max > w:
        raise CapacityError(f"set of {k_max} addresses exceeds address width {w}")
    regs = {"address": (0, w), "output": (w, d)}
    n_q = w + d
    if multi:
        ws = hamming_workspace_size(w)
        regs["bcopy"] = (n_q, w)
        regs["work"] = (n_q + w, ws)
        regs["flags"] = (n_q + w + ws, k_max)
        n_q += w + ws + k_max
    c = Circuit(n_q, registers=regs)
    address, output = c.register("address"), c.register("output")
    for si, s in enumerate(address_sets):
        c.mark(f"set {si}")
        if len(s) == 1 or entries[s[0]][0] == 0:
            for i in s:
                g = _x_string_gate(index_controls(address, entries[i][0]), output, entries[i][1])
                if g is not None:
                    c.append(g)
            continue
        bcopy, work, flags = c.register("bcopy"), c.register("work"), c.register("flags")
        diag, transformed = diagonalize_controls([entries[i][0] for i in s], w)
        conj = [_g("CNOT", address[src], address[dst]) for src, dst in (g.qubits for g in diag.gates)]
        copy = [_g("CNOT", address[q], bcopy[q]) for q in range(w)]
        compute, flag_gate, uncompute = _hamming_parts(address, flags[0], work)
        fan = fanout_gates([[f] for f in flags[: len(s)]])
        loads = []
        for r, (i, unit) in enumerate(zip(s, transformed)):
            pivot = unit.bit_length() - 1
            word = entries[i][1]
            targets = [output[b] for b in range(d) if (word >> b) & 1]
            if len(targets) == 1:
                loads.append(_g("TOFFOLI", bcopy[pivot], flags[r], targets[0]))
            elif targets:
                loads.append(Gate.mcp([(bcopy[pivot], 1), (flags[r], 1)], targets, "X" * len(targets)))
        forward = conj + copy + compute + [flag_gate] + fan
        c.extend(forward)
        c.extend(loads)
        c.extend(fan[::-1] + [flag_gate] + uncompute + copy[::-1] + conj[::-1])
    return c
