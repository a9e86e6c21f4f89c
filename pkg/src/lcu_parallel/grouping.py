"""Partitioning of Pauli terms and QROM addresses into parallelisable sets.

A parallelisable set is pairwise commuting and linearly independent over
GF(2) in the symplectic representation, with at most ``capacity`` members.
Terms are first split into commuting groups by sequential first-fit, then
each group is cut into independent sets by first-fit greedy.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ParseError, UndefinedStatisticError
from .gf2 import Gf2Basis, bits_to_str, gf2_rank
from .pauli import Observable

# numpy path works on uint64 words
_VECTOR_WIDTH_LIMIT = 64


@dataclass(frozen=True)
class ParallelSet:
    term_indices: tuple[int, ...]
    capacity: int

    def __len__(self):
        return len(self.term_indices)


@dataclass(frozen=True)
class FillingReport:
    filling_factor: float
    mean_set_size: float
    set_count: int
    set_size_histogram: dict[int, int]
    capacity: int
    # QROM only: statistic with the zero-address singleton counted as a set
    filling_with_zero: float | None = None

    def to_dict(self) -> dict:
        out = {
            "filling_factor": self.filling_factor,
            "mean_set_size": self.mean_set_size,
            "set_count": self.set_count,
            "capacity": self.capacity,
            "set_size_histogram": {str(k): v for k, v in sorted(self.set_size_histogram.items())},
        }
        if self.filling_with_zero is not None:
            out["filling_with_zero"] = self.filling_with_zero
        return out


@dataclass
class Partition:
    sets: list[ParallelSet]
    n_qubits: int
    source_term_count: int
    capacity: int
    identity_index: int | None = None
    identity_coefficient: float = 0.0

    @property
    def identity_excluded(self) -> bool:
        return self.identity_index is not None

    @property
    def capacity_exceeds_register(self) -> bool:
        """Capacity above the register size is accepted for statistics only."""
        return self.capacity > self.n_qubits

    @property
    def set_count(self) -> int:
        return len(self.sets)

    @property
    def partitioned_term_count(self) -> int:
        return sum(len(s) for s in self.sets)

    @property
    def max_set_size(self) -> int:
        return max((len(s) for s in self.sets), default=0)

    def to_text(self) -> str:
        payload = {
            "format": "lcu-partition/1",
            "n_qubits": self.n_qubits,
            "source_term_count": self.source_term_count,
            "capacity": self.capacity,
            "identity_index": self.identity_index,
            "identity_coefficient": self.identity_coefficient,
            "set_count": self.set_count,
            "sets": [list(s.term_indices) for s in self.sets],
        }
        return json.dumps(payload, indent=1) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Partition:
        try:
            data = json.loads(text)
            cap = int(data["capacity"])
            return cls(
                sets=[ParallelSet(tuple(int(i) for i in s), cap) for s in data["sets"]],
                n_qubits=int(data["n_qubits"]),
                source_term_count=int(data["source_term_count"]),
                capacity=cap,
                identity_index=data["identity_index"],
                identity_coefficient=float(data["identity_coefficient"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad partition file: {exc}") from exc


def term_order(obs: Observable) -> list[int]:
    """Greedy processing order: descending |coefficient|, ties by file order; identity left out."""
    return sorted(
        (i for i, t in enumerate(obs.terms) if not t.pauli.is_identity()),
        key=lambda i: (-abs(obs.terms[i].coefficient), i),
    )


def partition_commuting(obs: Observable) -> list[list[int]]:
    """Approximate minimum clique cover of the commutation graph by sequential first-fit.

    Each term joins the first existing group whose members it all commutes
    with, otherwise opens a new group.
    """
    if len(obs) == 0:
        raise UndefinedStatisticError("observable has no terms")
    order = term_order(obs)
    if obs.n_qubits < _VECTOR_WIDTH_LIMIT:
        return _first_fit_commuting_numpy(obs, order)
    return _first_fit_commuting_python(obs, order)


def _first_fit_commuting_numpy(obs: Observable, order: list[int]) -> list[list[int]]:
    m = len(order)
    xs = np.zeros(m, dtype=np.uint64)
    zs = np.zeros(m, dtype=np.uint64)
    gid = np.zeros(m, dtype=np.int64)
    groups: list[list[int]] = []
    for k, i in enumerate(order):
        p = obs.terms[i].pauli
        xt, zt = np.uint64(p.x), np.uint64(p.z)
        g = len(groups)
        if k:
            anti = np.bitwise_count((xs[:k] & zt) ^ (zs[:k] & xt)) & np.uint8(1)
            bad = np.bincount(gid[:k], weights=anti, minlength=len(groups))
            free = np.flatnonzero(bad == 0)
            if free.size:
                g = int(free[0])
        if g == len(groups):
            groups.append([])
        groups[g].append(i)
        xs[k], zs[k], gid[k] = xt, zt, g
    return groups


def _first_fit_commuting_python(obs: Observable, order: list[int]) -> list[list[int]]:
    groups: list[list[int]] = []
    for i in order:
        p = obs.terms[i].pauli
        for g in groups:
            if all(
                not ((p.x & obs.terms[j].pauli.z) ^ (p.z & obs.terms[j].pauli.x)).bit_count() & 1
                for j in g
            ):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


class _FirstFit:
    """First-fit packing of vectors into linearly independent sets of bounded size.

    A set stops accepting once it holds ``capacity`` vectors or spans the
    whole space ``span_rank``; closed sets are dropped from the search so
    the per-vector cost scales with the number of open sets.
    """

    def __init__(self, width: int, capacity: int, span_rank: int):
        self.width = width
        self.capacity = capacity
        self.limit = min(capacity, span_rank)
        self.sets: list[list[int]] = []
        self.vectorized = width <= _VECTOR_WIDTH_LIMIT
        self.open_ids: list[int] = []
        if self.vectorized:
            self.bases = np.zeros((0, width), dtype=np.uint64)
            self._leads = np.arange(width - 1, -1, -1, dtype=np.uint64)
        else:
            self.py_bases: list[Gf2Basis] = []

    def add(self, vec: int, label: int) -> int:
        slot, reduced = self._find(vec)
        if slot is None:
            sid = len(self.sets)
            self.sets.append([])
            self.open_ids.append(sid)
            slot = len(self.open_ids) - 1
            if self.vectorized:
                self.bases = np.vstack([self.bases, np.zeros((1, self.width), dtype=np.uint64)])
            else:
                self.py_bases.append(Gf2Basis())
            reduced = vec
        sid = self.open_ids[slot]
        self.sets[sid].append(label)
        if self.vectorized:
            self.bases[slot, reduced.bit_length() - 1] = np.uint64(reduced)
        else:
            self.py_bases[slot].add(reduced)
        if len(self.sets[sid]) >= self.limit:
            del self.open_ids[slot]
            if self.vectorized:
                self.bases = np.delete(self.bases, slot, axis=0)
            else:
                del self.py_bases[slot]
        return sid

    def _find(self, vec: int) -> tuple[int | None, int]:
        if not self.open_ids:
            return None, vec
        if not self.vectorized:
            for slot, basis in enumerate(self.py_bases):
                r = basis.reduce(vec)
                if r:
                    return slot, r
            return None, vec
        cur = np.full(len(self.open_ids), np.uint64(vec), dtype=np.uint64)
        one = np.uint64(1)
        for lead in self._leads:
            hit = ((cur >> lead) & one).astype(bool)
            if hit.any():
                cur ^= np.where(hit, self.bases[:, int(lead)], np.uint64(0))
        nz = np.flatnonzero(cur)
        if nz.size == 0:
            return None, vec
        slot = int(nz[0])
        return slot, int(cur[slot])


def refine_independent(obs: Observable, groups: Sequence[Sequence[int]], capacity: int | None = None) -> Partition:
    """Split each commuting group into linearly independent sets of at most ``capacity`` terms."""
    n = obs.n_qubits
    capacity = n if capacity is None else capacity
    if capacity < 1:
        raise ValueError("capacity must be at least 1")
    sets: list[ParallelSet] = []
    for group in groups:
        vecs = [obs.terms[i].pauli.symplectic_vector() for i in group]
        packer = _FirstFit(2 * n, capacity, gf2_rank(vecs))
        for i, v in zip(group, vecs):
            packer.add(v, i)
        sets.extend(ParallelSet(tuple(s), capacity) for s in packer.sets)
    ident = obs.identity_index
    return Partition(
        sets=sets,
        n_qubits=n,
        source_term_count=len(obs),
        capacity=capacity,
        identity_index=ident,
        identity_coefficient=obs.terms[ident].coefficient if ident is not None else 0.0,
    )


def filling_report(sizes: Sequence[int], capacity: int, extra_singletons: int = 0) -> FillingReport:
    if not sizes:
        raise UndefinedStatisticError("filling factor of an empty partition is undefined")
    total = sum(sizes)
    mean = total / len(sizes)
    with_zero = None
    if extra_singletons:
        with_zero = (total + extra_singletons) / (len(sizes) + extra_singletons) / capacity
    return FillingReport(
        filling_factor=mean / capacity,
        mean_set_size=mean,
        set_count=len(sizes),
        set_size_histogram=dict(sorted(Counter(sizes).items())),
        capacity=capacity,
        filling_with_zero=with_zero,
    )


def filling_factor(partition: Partition) -> float:
    """Mean set size divided by the register capacity."""
    return filling_report([len(s) for s in partition.sets], partition.capacity).filling_factor


def partition_parallel(obs: Observable, capacity: int | None = None) -> tuple[Partition, FillingReport]:
    partition = refine_independent(obs, partition_commuting(obs), capacity)
    return partition, filling_report([len(s) for s in partition.sets], partition.capacity)


@dataclass
class QromPartition:
    sets: list[list[int]]
    width: int
    zero_index: int | None
    report: FillingReport | None = field(default=None)


def partition_qrom_addresses(patterns: Sequence[int], width: int) -> QromPartition:
    """Greedy independent sets over address bit patterns (indices into ``patterns``).

    Patterns are processed in decreasing integer value. The all-zero address
    cannot be diagonalised and is returned separately as ``zero_index``.
    """
    seen: dict[int, int] = {}
    for i, p in enumerate(patterns):
        if p < 0 or p >> width:
            raise ParseError(f"pattern {p} does not fit in {width} bits")
        if p in seen:
            raise ParseError(f"duplicate address pattern {bits_to_str(p, width)}")
        seen[p] = i
    zero_index = seen.pop(0, None)
    order = sorted(seen, reverse=True)
    packer = _FirstFit(width, width, gf2_rank(order))
    for p in order:
        packer.add(p, seen[p])
    sets = packer.sets
    report = None
    if sets:
        report = filling_report(
            [len(s) for s in sets], width, extra_singletons=1 if zero_index is not None else 0
        )
    return QromPartition(sets, width, zero_index, report)
