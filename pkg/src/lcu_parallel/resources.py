"""Analytic cost model for serial and parallel SELECT.

Defaults reproduce the standard accounting: a multi-controlled gate with
``c`` controls costs ``4 (c - 1)`` T gates, the parallel circuit holds ``n``
copies of the index register plus ``3n`` teleportation ancilla for the
constant-depth Cliffords, and each parallel set is one T-layer.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

from .circuits import Circuit, T_KINDS, schedule_layers
from .clifford import DEFAULT_STAGE_DEPTH
from .errors import PreconditionError
from .grouping import Partition, filling_factor
from .pauli import Observable

COPIES_CONVENTIONS = ("n", "max_set_size")


@dataclass(frozen=True)
class CostModelConfig:
    t_per_control_pair: int = 4
    unary_iteration: bool = False
    d_stage: int = DEFAULT_STAGE_DEPTH
    copies_convention: str = "n"
    # optional T-factory footprint added to both qubit columns
    factory_qubits: int = 0
    factories: int = 0

    def __post_init__(self):
        if self.copies_convention not in COPIES_CONVENTIONS:
            raise PreconditionError(f"copies convention must be one of {COPIES_CONVENTIONS}")
        if self.t_per_control_pair < 1 or self.d_stage < 1:
            raise PreconditionError("cost constants must be positive")
        if self.factory_qubits < 0 or self.factories < 0:
            raise PreconditionError("factory constants cannot be negative")

    @property
    def factory_footprint(self) -> int:
        return self.factory_qubits * self.factories

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ResourceReport:
    n_qubits: int
    term_count: int
    index_width: int
    set_count: int
    copies: int
    qubits_serial: int
    qubits_parallel: int
    t_depth_serial: int
    t_depth_parallel: int
    t_count: int
    depth_reduction_factor: float
    qubit_factor: float
    stv_ratio: float
    copies_convention: str
    filling_factor: float | None = None
    asymptotic_factor: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def index_width(term_count: int) -> int:
    return max(1, (term_count - 1).bit_length())


def mcp_t_cost(controls: int, config: CostModelConfig = CostModelConfig()) -> int:
    return config.t_per_control_pair * max(controls - 1, 0)


def estimate_select(
    n: int,
    term_count: int,
    set_count: int,
    config: CostModelConfig = CostModelConfig(),
    max_set_size: int | None = None,
    width: int | None = None,
) -> ResourceReport:
    """Qubits, T-depth and space-time volume of serial vs parallel SELECT.

    ``width`` overrides the index register width (by default
    ``ceil(log2 term_count)``); ``max_set_size`` is required by the
    ``max_set_size`` copies convention.
    """
    L = term_count
    if n < 1 or set_count < 1:
        raise PreconditionError("need at least one qubit and one set")
    if set_count > L:
        raise PreconditionError(f"set_count {set_count} exceeds term count {L}")
    a = index_width(L) if width is None else width
    if config.copies_convention == "n":
        copies = n
    else:
        if max_set_size is None:
            raise PreconditionError("the max_set_size convention needs the largest set size")
        copies = max_set_size
    extra = config.factory_footprint
    qs = n + a + extra
    qp = n + copies * a + 3 * n + extra
    if config.unary_iteration:
        tc = config.t_per_control_pair * (L - 1)
    else:
        tc = L * mcp_t_cost(a, config)
    return ResourceReport(
        n_qubits=n,
        term_count=L,
        index_width=a,
        set_count=set_count,
        copies=copies,
        qubits_serial=qs,
        qubits_parallel=qp,
        t_depth_serial=L,
        t_depth_parallel=set_count,
        t_count=tc,
        depth_reduction_factor=L / set_count,
        qubit_factor=qp / qs,
        stv_ratio=(qs * L) / (qp * set_count),
        copies_convention=config.copies_convention,
    )


def estimate_from_partition(
    obs: Observable, partition: Partition, config: CostModelConfig = CostModelConfig()
) -> ResourceReport:
    """Report for a measured partition, adding the filling factor and ``n F / log2 n``."""
    if partition.n_qubits != obs.n_qubits or partition.source_term_count != len(obs):
        raise PreconditionError("partition was not built from this observable")
    base = estimate_select(
        obs.n_qubits,
        partition.partitioned_term_count,
        partition.set_count,
        config,
        max_set_size=partition.max_set_size,
        width=obs.index_width,
    )
    f = filling_factor(partition)
    n = obs.n_qubits
    asym = n * f / math.log2(n) if n > 1 else None
    return ResourceReport(**{**base.to_dict(), "filling_factor": f, "asymptotic_factor": asym})


def t_count(
    circuit: Circuit | None = None,
    config: CostModelConfig = CostModelConfig(),
    *,
    term_count: int | None = None,
    controls_per_gate: int | Iterable[int] | None = None,
) -> int:
    """T gates under the naive per-gate model, or the unary ladder for a serial SELECT.

    Pass either a circuit or ``term_count`` with ``controls_per_gate``
    (a single count shared by every gate, or one count per gate).
    """
    if config.unary_iteration:
        if term_count is None:
            if circuit is None:
                raise PreconditionError("unary mode needs a term count or a circuit")
            term_count = sum(1 for g in circuit.gates if g.kind in T_KINDS)
        return config.t_per_control_pair * max(term_count - 1, 0)
    if circuit is not None:
        return sum(mcp_t_cost(g.control_count, config) for g in circuit.gates if g.kind in T_KINDS)
    if term_count is None or controls_per_gate is None:
        raise PreconditionError("need a circuit or term_count with controls_per_gate")
    if isinstance(controls_per_gate, int):
        return term_count * mcp_t_cost(controls_per_gate, config)
    counts = list(controls_per_gate)
    if len(counts) != term_count:
        raise PreconditionError("one control count per gate is required")
    return sum(mcp_t_cost(c, config) for c in counts)


@dataclass(frozen=True)
class CircuitMetrics:
    qubits: int
    gates: int
    depth: int
    t_depth: int
    t_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def measure_circuit(circuit: Circuit, config: CostModelConfig = CostModelConfig()) -> CircuitMetrics:
    sched = schedule_layers(circuit)
    return CircuitMetrics(
        qubits=circuit.n_qubits,
        gates=len(circuit.gates),
        depth=sched.depth,
        t_depth=sched.t_depth,
        t_count=t_count(circuit, CostModelConfig(config.t_per_control_pair, False, config.d_stage)),
    )
