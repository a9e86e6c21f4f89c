"""Pauli operators in symplectic (x|z) form.

Bit ``i`` of ``x``/``z`` refers to qubit ``i``; in the text form the leftmost
character is qubit 0. Per qubit, ``(x, z)`` decodes as ``(0,0)=I``,
``(1,0)=X``, ``(0,1)=Z`` and ``(1,1)=Y``, so a stored string equals
``sign * i**popcount(x & z) * X^x Z^z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DimensionError, ParseError, PhaseError

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}

# Terms whose merged coefficient falls below this magnitude are dropped.
DROP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    x: int
    z: int
    sign: int = 1

    def __post_init__(self):
        limit = 1 << self.n_qubits
        if self.x < 0 or self.z < 0 or self.x >= limit or self.z >= limit:
            raise DimensionError(f"bit patterns do not fit in {self.n_qubits} qubits")
        if self.sign not in (1, -1):
            raise PhaseError(f"sign must be +1 or -1, got {self.sign!r}")

    @classmethod
    def from_str(cls, text: str) -> PauliString:
        text = text.strip()
        sign = 1
        if text[:1] in "+-" and text:
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        if not text:
            raise ParseError("empty Pauli string")
        x = z = 0
        for i, ch in enumerate(text.upper()):
            try:
                xb, zb = _LETTER_BITS[ch]
            except KeyError:
                raise ParseError(f"invalid Pauli letter {ch!r}") from None
            x |= xb << i
            z |= zb << i
        return cls(len(text), x, z, sign)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits, 0, 0, 1)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str, sign: int = 1) -> PauliString:
        xb, zb = _LETTER_BITS[letter]
        return cls(n_qubits, xb << qubit, zb << qubit, sign)

    @property
    def letters(self) -> str:
        return "".join(
            _BITS_LETTER[((self.x >> i) & 1, (self.z >> i) & 1)] for i in range(self.n_qubits)
        )

    def __str__(self):
        return ("-" if self.sign < 0 else "") + self.letters

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def support(self) -> list[int]:
        s = self.x | self.z
        return [i for i in range(self.n_qubits) if (s >> i) & 1]

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def unsigned(self) -> PauliString:
        return PauliString(self.n_qubits, self.x, self.z, 1)

    def negate(self) -> PauliString:
        return PauliString(self.n_qubits, self.x, self.z, -self.sign)

    def symplectic_vector(self) -> int:
        """Concatenated ``x | z`` as a ``2n``-bit integer (x in the low bits)."""
        return self.x | (self.z << self.n_qubits)

    @classmethod
    def from_symplectic(cls, n_qubits: int, vec: int, sign: int = 1) -> PauliString:
        mask = (1 << n_qubits) - 1
        return cls(n_qubits, vec & mask, vec >> n_qubits, sign)


def _check_sizes(p: PauliString, q: PauliString) -> None:
    if p.n_qubits != q.n_qubits:
        raise DimensionError(f"qubit counts differ: {p.n_qubits} vs {q.n_qubits}")


def symplectic_product(p: PauliString, q: PauliString) -> int:
    """0 if ``p`` and ``q`` commute, 1 if they anticommute."""
    _check_sizes(p, q)
    return ((p.x & q.z) ^ (p.z & q.x)).bit_count() & 1


def commutes(p: PauliString, q: PauliString) -> bool:
    return symplectic_product(p, q) == 0


def multiply_with_phase(p: PauliString, q: PauliString) -> tuple[PauliString, int]:
    """Return ``(r, k)`` with ``p @ q == i**k * r`` and ``r.sign == +1``."""
    _check_sizes(p, q)
    x = p.x ^ q.x
    z = p.z ^ q.z
    k = (p.x & p.z).bit_count() + (q.x & q.z).bit_count()
    k += 2 * (p.z & q.x).bit_count() - (x & z).bit_count()
    if p.sign < 0:
        k += 2
    if q.sign < 0:
        k += 2
    return PauliString(p.n_qubits, x, z, 1), k % 4


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Product ``p @ q``; raises :class:`PhaseError` if the result is imaginary."""
    r, k = multiply_with_phase(p, q)
    if k & 1:
        raise PhaseError(f"{p} * {q} carries an imaginary phase")
    return r if k == 0 else r.negate()


@dataclass(frozen=True)
class PauliTerm:
    pauli: PauliString
    coefficient: float

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise ParseError(f"non-finite coefficient {self.coefficient!r}")

    @property
    def unitary_sign(self) -> int:
        """Sign of the unitary applied by SELECT once the coefficient is made positive."""
        s = self.pauli.sign
        return -s if self.coefficient < 0 else s

    def canonical(self) -> PauliTerm:
        """Fold a negative coefficient into the Pauli sign."""
        if self.coefficient < 0:
            return PauliTerm(self.pauli.negate(), -self.coefficient)
        return self

    def equivalent(self, other: PauliTerm) -> bool:
        a, b = self.canonical(), other.canonical()
        return a.pauli == b.pauli and a.coefficient == b.coefficient


@dataclass
class Observable:
    """A real linear combination of Pauli strings with distinct bit patterns."""

    n_qubits: int
    terms: list[PauliTerm]
    stats: dict = field(default_factory=dict)

    @classmethod
    def from_terms(cls, terms: Iterable[PauliTerm], n_qubits: int | None = None) -> Observable:
        """Merge duplicate bit patterns by coefficient addition and drop near-zero terms.

        Signs are folded into the coefficient while merging, so ``-ZZ`` and
        ``ZZ`` cancel. First-appearance order is preserved.
        """
        merged: dict[tuple[int, int], float] = {}
        seen = 0
        for t in terms:
            if n_qubits is None:
                n_qubits = t.pauli.n_qubits
            elif t.pauli.n_qubits != n_qubits:
                raise DimensionError(
                    f"term {t.pauli} has {t.pauli.n_qubits} qubits, expected {n_qubits}"
                )
            key = (t.pauli.x, t.pauli.z)
            merged[key] = merged.get(key, 0.0) + t.pauli.sign * t.coefficient
            seen += 1
        if n_qubits is None:
            raise ParseError("observable has no terms")
        kept = [
            PauliTerm(PauliString(n_qubits, x, z), c)
            for (x, z), c in merged.items()
            if abs(c) >= DROP_TOLERANCE
        ]
        stats = {
            "input_terms": seen,
            "merged": seen - len(merged),
            "dropped": len(merged) - len(kept),
        }
        return cls(n_qubits, kept, stats)

    @classmethod
    def from_strings(cls, pairs: Sequence[tuple[float, str]]) -> Observable:
        return cls.from_terms(PauliTerm(PauliString.from_str(s), float(c)) for c, s in pairs)

    def __len__(self):
        return len(self.terms)

    @property
    def l1_norm(self) -> float:
        return math.fsum(abs(t.coefficient) for t in self.terms)

    @property
    def identity_index(self) -> int | None:
        for i, t in enumerate(self.terms):
            if t.pauli.is_identity():
                return i
        return None

    @property
    def index_width(self) -> int:
        """Index register width ``ceil(log2 L)``, at least 1."""
        return max(1, (len(self.terms) - 1).bit_length())

    def canonical(self) -> Observable:
        return Observable(self.n_qubits, [t.canonical() for t in self.terms], dict(self.stats))
