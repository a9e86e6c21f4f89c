"""File ingestion, report serialisation, sweeps and sample-input generators."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .circuits import QromTable
from .errors import CapacityError, DimensionError, ParseError
from .gf2 import bits_to_str, str_to_bits
from .grouping import partition_qrom_addresses
from .pauli import Observable, PauliString, PauliTerm

log = logging.getLogger(__name__)

SWEEP_SCHEMA = "lcu-sweep-qrom/1"
REPORT_SCHEMA = "lcu-resource-report/1"
SWEEP_MAX_N = 16


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_observable_text(text: str) -> Observable:
    """Parse ``<coefficient> <pauli>`` lines; ``#`` starts a comment."""
    terms: list[PauliTerm] = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected '<coefficient> <pauli>', got {raw.strip()!r}", line=lineno)
        try:
            coeff = float(parts[0])
        except ValueError:
            raise ParseError(f"bad coefficient {parts[0]!r}", line=lineno) from None
        try:
            p = PauliString.from_str(parts[1])
            term = PauliTerm(p, coeff)
        except ParseError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if n is None:
            n = p.n_qubits
        elif p.n_qubits != n:
            raise DimensionError(f"{p.n_qubits}-qubit string after {n}-qubit strings", line=lineno)
        terms.append(term)
    if not terms:
        raise ParseError("observable file has no terms")
    obs = Observable.from_terms(terms, n)
    log.info("ingested %(input_terms)d lines, merged %(merged)d, dropped %(dropped)d", obs.stats)
    return obs


def parse_observable(path: str | Path) -> Observable:
    return parse_observable_text(_read(path))


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def format_observable(obs: Observable) -> str:
    return "".join(f"{t.coefficient!r} {t.pauli}\n" for t in obs.terms)


def parse_qrom_table_text(text: str) -> QromTable:
    """Rows of ``address_bits data_bits``; bit strings are written bit 0 first."""
    entries: list[tuple[int, int]] = []
    widths = None
    seen: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or any(set(p) - {"0", "1"} for p in parts):
            raise ParseError(f"expected '<address bits> <data bits>', got {raw.strip()!r}", line=lineno)
        w = (len(parts[0]), len(parts[1]))
        if widths is None:
            widths = w
        elif w != widths:
            raise DimensionError(f"row widths {w} differ from {widths}", line=lineno)
        addr = str_to_bits(parts[0])
        if addr in seen:
            raise ParseError(f"duplicate address {parts[0]} (first on line {seen[addr]})", line=lineno)
        seen[addr] = lineno
        entries.append((addr, str_to_bits(parts[1])))
    if widths is None:
        raise ParseError("QROM table is empty")
    return QromTable(widths[0], widths[1], tuple(entries))


def parse_qrom_table(path: str | Path) -> QromTable:
    return parse_qrom_table_text(_read(path))


def format_qrom_table(table: QromTable) -> str:
    return "".join(
        f"{bits_to_str(a, table.address_width)} {bits_to_str(d, table.data_width)}\n"
        for a, d in table.entries
    )


# ------------------------------------------------------------------ generators


def random_observable(n: int, term_count: int, seed: int = 0, sign_fraction: float = 0.3) -> Observable:
    """Random real combination of Pauli strings; duplicates merge on ingestion."""
    rng = random.Random(seed)
    pairs = []
    for _ in range(term_count):
        s = "".join(rng.choice("IXYZ") for _ in range(n))
        sign = "-" if rng.random() < sign_fraction else ""
        pairs.append((rng.choice((-1.0, 1.0)) * rng.uniform(0.05, 2.0), sign + s))
    return Observable.from_strings(pairs)


def x_string_observable(n: int) -> Observable:
    """All ``2**n`` tensor products of X and I with unit coefficients."""
    return Observable.from_terms(
        (PauliTerm(PauliString(n, x, 0), 1.0) for x in range(1 << n)), n
    )


def random_qrom_table(address_width: int, data_width: int, entries: int | None = None, seed: int = 0) -> QromTable:
    rng = random.Random(seed)
    size = 1 << address_width
    k = size if entries is None else entries
    if k > size:
        raise CapacityError(f"{k} entries do not fit {address_width} address bits")
    addrs = sorted(rng.sample(range(size), k))
    return QromTable(address_width, data_width, tuple((a, rng.randrange(1 << data_width)) for a in addrs))


# ---------------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepRow:
    n: int
    term_count: int
    set_count: int
    depth_reduction: float
    filling: float
    filling_with_zero: float


SWEEP_COLUMNS = tuple(SweepRow.__dataclass_fields__)


def qrom_sweep_row(n: int) -> SweepRow:
    """Greedy partition of all nonzero ``n``-bit patterns; the zero pattern is a separate singleton."""
    qp = partition_qrom_addresses(list(range(1 << n)), n)
    terms = (1 << n) - 1
    sets = len(qp.sets)
    depth = terms / sets
    return SweepRow(n, terms, sets, depth, depth / n, (terms + 1) / (sets + 1) / n)


def qrom_filling_sweep(max_n: int, min_n: int = 2, jobs: int = 1) -> list[SweepRow]:
    if not 2 <= min_n <= max_n <= SWEEP_MAX_N:
        raise CapacityError(f"sweep bounds must satisfy 2 <= min_n <= max_n <= {SWEEP_MAX_N}")
    ns = range(min_n, max_n + 1)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(qrom_sweep_row, ns))
    return [qrom_sweep_row(n) for n in ns]


def sweep_summary(rows: Sequence[SweepRow], monotone_from: int = 4) -> dict:
    """Trend check on both conventions; floating noise below 1e-12 is ignored."""

    def non_decreasing(attr: str) -> bool:
        vals = [getattr(r, attr) for r in rows if r.n >= monotone_from]
        return all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    last = rows[-1] if rows else None
    return {
        "monotone_from_n": monotone_from,
        "filling_non_decreasing": non_decreasing("filling"),
        "filling_with_zero_non_decreasing": non_decreasing("filling_with_zero"),
        "final_n": last.n if last else None,
        "final_filling": last.filling if last else None,
        "final_filling_with_zero": last.filling_with_zero if last else None,
    }


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(round(v, 12))
    if v is None:
        return ""
    return str(v)


def rows_to_csv(schema: str, columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {schema}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    return rows_to_csv(SWEEP_SCHEMA, SWEEP_COLUMNS, (asdict(r) for r in rows))


def report_to_csv(report) -> str:
    d = report.to_dict()
    return rows_to_csv(REPORT_SCHEMA, tuple(d), [d])


def to_report_text(payload: dict) -> str:
    """Structured text for reports: JSON with stable key order and a trailing newline."""
    return json.dumps(payload, indent=1, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# -------------------------------------------------------------------- manifest


def sha256_of(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def tool_version() -> str:
    from . import __version__

    return __version__


@dataclass
class RunManifest:
    """Everything that determines a run's outputs. No timestamps, so equal manifests mean equal bytes."""

    command: str
    inputs: dict[str, str] = field(default_factory=dict)
    seed: int = 0
    config: dict = field(default_factory=dict)
    orderings: dict = field(default_factory=lambda: dict(ORDERINGS))
    tool_version: str = field(default_factory=tool_version)

    def add_input(self, path: str | Path) -> None:
        self.inputs[Path(path).name] = sha256_of(path)

    def to_text(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True) + "\n"


ORDERINGS = {
    "terms": "descending |coefficient|, ties by file order, identity excluded",
    "commuting_groups": "sequential first-fit",
    "independent_sets": "first-fit within each group",
    "qrom_patterns": "descending integer value, zero pattern set aside",
}
