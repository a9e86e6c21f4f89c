"""Parallel SELECT and QROM compilation: Pauli grouping, Clifford synthesis, circuit builders and cost models."""

__version__ = "0.1.0"

from .circuits import (
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
    schedule_layers,
)
from .clifford import (
    CliffordTableau,
    StagedCircuit,
    conjugate_pauli,
    constant_depth_cost,
    normal_form_stages,
    synth_diagonalizing_clifford,
    tableau_from_circuit,
)
from .grouping import Partition, filling_factor, partition_commuting, partition_parallel, partition_qrom_addresses, refine_independent
from .pauli import Observable, PauliString, PauliTerm, commutes, multiply, symplectic_product
from .resources import CostModelConfig, ResourceReport, estimate_from_partition, estimate_select, t_count
from .sim import StateVector, apply_circuit, circuits_equivalent
