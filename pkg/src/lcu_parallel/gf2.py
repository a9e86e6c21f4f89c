"""Linear algebra over GF(2) on word-packed rows.

Rows are Python integers; column ``j`` is bit ``j``. Integer XOR and
``bit_count`` give word-parallel row operations for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, IndependenceError


@dataclass(frozen=True)
class BitMatrix:
    rows: tuple[int, ...]
    cols: int

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        limit = 1 << self.cols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise DimensionError(f"row {r:#x} does not fit in {self.cols} columns")

    @classmethod
    def from_strings(cls, rows: Sequence[str]) -> BitMatrix:
        """Rows given as bit strings, leftmost character is column 0."""
        if not rows:
            return cls((), 0)
        cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise DimensionError("rows have unequal length")
        return cls(tuple(int(r[::-1], 2) for r in rows), cols)

    @classmethod
    def from_array(cls, arr) -> BitMatrix:
        arr = np.asarray(arr, dtype=np.uint8) & 1
        weights = 1 << np.arange(arr.shape[1], dtype=object)
        return cls(tuple(int((row.astype(object) * weights).sum()) for row in arr), arr.shape[1])

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(tuple(1 << i for i in range(n)), n)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def to_array(self) -> np.ndarray:
        out = np.zeros((len(self.rows), self.cols), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for j in range(self.cols):
                out[i, j] = (r >> j) & 1
        return out

    def to_strings(self) -> list[str]:
        return [format(r, f"0{self.cols}b")[::-1] if self.cols else "" for r in self.rows]

    def transpose(self) -> BitMatrix:
        return BitMatrix(
            tuple(
                sum(((r >> j) & 1) << i for i, r in enumerate(self.rows)) for j in range(self.cols)
            ),
            len(self.rows),
        )


def bits_to_str(v: int, width: int) -> str:
    return format(v, f"0{width}b")[::-1] if width else ""


def str_to_bits(s: str) -> int:
    return int(s[::-1], 2)


def gf2_rank(m: BitMatrix | Iterable[int]) -> int:
    rows = m.rows if isinstance(m, BitMatrix) else m
    basis = Gf2Basis()
    return sum(basis.add(r) for r in rows)


@dataclass
class Gf2Basis:
    """Echelon basis keyed by leading bit; each stored vector has a distinct highest set bit."""

    by_lead: dict[int, int] = field(default_factory=dict)

    def __len__(self):
        return len(self.by_lead)

    def reduce(self, v: int) -> int:
        while v:
            lead = v.bit_length() - 1
            b = self.by_lead.get(lead)
            if b is None:
                return v
            v ^= b
        return 0

    def add(self, v: int) -> bool:
        """Insert ``v`` in place; False when ``v`` is already in the span."""
        r = self.reduce(v)
        if not r:
            return False
        self.by_lead[r.bit_length() - 1] = r
        return True

    def copy(self) -> Gf2Basis:
        return Gf2Basis(dict(self.by_lead))

    @classmethod
    def from_rows(cls, rows: Iterable[int]) -> Gf2Basis:
        basis = cls()
        for r in rows:
            basis.add(r)
        return basis

    def to_matrix(self, cols: int) -> BitMatrix:
        return BitMatrix(tuple(self.by_lead[k] for k in sorted(self.by_lead)), cols)


def independent_extend(basis: Gf2Basis | BitMatrix, v: int) -> tuple[bool, Gf2Basis]:
    """Accept ``v`` if it lies outside the span of ``basis``.

    Returns the decision and the (possibly) extended basis; the input basis
    is never modified. The zero vector is always rejected.
    """
    if isinstance(basis, BitMatrix):
        if v >> basis.cols:
            raise DimensionError(f"vector wider than {basis.cols} columns")
        basis = Gf2Basis.from_rows(basis.rows)
    r = basis.reduce(v)
    if not r:
        return False, basis
    out = basis.copy()
    out.by_lead[r.bit_length() - 1] = r
    return True, out


def row_reduce(rows: Sequence[int], cols: int) -> tuple[list[int], list[tuple[int, int]], list[int | None]]:
    """Reduced row echelon form using row additions only (no swaps).

    Returns ``(reduced_rows, log, pivot_of_row)`` where ``log`` lists
    ``(source, target)`` pairs meaning ``row[target] ^= row[source]``,
    applied in order, and ``pivot_of_row[i]`` is the pivot column of row
    ``i`` or ``None`` for rows that reduced to zero.
    """
    rows = list(rows)
    log: list[tuple[int, int]] = []
    pivot_of_row: list[int | None] = [None] * len(rows)
    for c in range(cols):
        bit = 1 << c
        piv = next(
            (i for i, r in enumerate(rows) if pivot_of_row[i] is None and r & bit),
            None,
        )
        if piv is None:
            continue
        pivot_of_row[piv] = c
        for i, r in enumerate(rows):
            if i != piv and r & bit:
                rows[i] ^= rows[piv]
                log.append((piv, i))
    return rows, log, pivot_of_row


def replay_row_ops(rows: Sequence[int], log: Iterable[tuple[int, int]]) -> list[int]:
    rows = list(rows)
    for src, dst in log:
        rows[dst] ^= rows[src]
    return rows


@dataclass(frozen=True)
class GaussJordanResult:
    reduced: BitMatrix
    log: tuple[tuple[int, int], ...]
    pivots: tuple[int, ...]


def gauss_jordan(m: BitMatrix) -> GaussJordanResult:
    """Reduced row echelon form of linearly independent rows.

    ``pivots[i]`` is the pivot column of reduced row ``i``; no other row has
    that bit set. For a square input every reduced row is a unit vector.
    """
    if m.n_rows > m.cols:
        raise IndependenceError(
            f"{m.n_rows} rows cannot be independent in {m.cols} columns", index=m.cols
        )
    basis = Gf2Basis()
    for i, r in enumerate(m.rows):
        if not basis.add(r):
            raise IndependenceError(f"row {i} depends on the preceding rows", index=i)
    reduced, log, pivots = row_reduce(m.rows, m.cols)
    return GaussJordanResult(BitMatrix(tuple(reduced), m.cols), tuple(log), tuple(pivots))


def gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) @ b.astype(np.int64) % 2).astype(np.uint8)


def gf2_inv(a: np.ndarray) -> np.ndarray:
    """Inverse of a square GF(2) matrix; raises :class:`IndependenceError` if singular."""
    a = np.asarray(a, dtype=np.uint8) & 1
    n = a.shape[0]
    aug = np.concatenate([a, np.eye(n, dtype=np.uint8)], axis=1)
    for c in range(n):
        nz = np.nonzero(aug[c:, c])[0]
        if nz.size == 0:
            raise IndependenceError("matrix is singular over GF(2)", index=c)
        p = c + int(nz[0])
        if p != c:
            aug[[c, p]] = aug[[p, c]]
        others = np.nonzero(aug[:, c])[0]
        others = others[others != c]
        aug[others] ^= aug[c]
    return aug[:, n:].copy()
