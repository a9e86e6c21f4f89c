"""Command-line front end: partition, synth, build-select, build-qrom, verify, estimate, sweep-qrom, pipeline."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .circuits import (
    Circuit,
    build_qrom_parallel,
    build_qrom_serial,
    build_select_parallel,
    build_select_serial,
    clifford_gates,
    synthesize_partition,
)
from .clifford import constant_depth_cost, normal_form_stages, tableau_from_circuit
from .errors import LcuError, ParseError, VerificationError
from .grouping import Partition, partition_parallel
from .io_formats import (
    RunManifest,
    parse_observable,
    parse_qrom_table,
    qrom_filling_sweep,
    report_to_csv,
    rows_to_csv,
    sweep_summary,
    sweep_to_csv,
    to_report_text,
)
from .resources import CostModelConfig, estimate_from_partition, estimate_select, measure_circuit
from .sim import DEFAULT_QUBIT_CAP, DEFAULT_TOLERANCE, DEFAULT_TRIALS, classical_outputs, circuits_equivalent

log = logging.getLogger("lcu_parallel")


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _config(args) -> CostModelConfig:
    return CostModelConfig(
        t_per_control_pair=args.t_per_control_pair,
        unary_iteration=args.unary_iteration,
        d_stage=args.d_stage,
        copies_convention=args.copies_convention,
    )


def _partition(args, obs):
    if getattr(args, "partition", None):
        part = Partition.from_text(Path(args.partition).read_text(encoding="utf-8"))
        if part.source_term_count != len(obs) or part.n_qubits != obs.n_qubits:
            raise ParseError("partition file does not match the observable")
        return part
    part, _ = partition_parallel(obs, args.capacity)
    return part


def _synth_payload(obs, part, d_stage):
    sets = []
    for g, (pset, cl) in enumerate(zip(part.sets, synthesize_partition(obs, part))):
        staged = normal_form_stages(tableau_from_circuit(cl.gates, obs.n_qubits))
        sets.append(
            {
                "set": g,
                "terms": list(pset.term_indices),
                "signs": list(cl.signs),
                "gates": len(cl.gates),
                "stages": staged.kinds(),
                "two_qubit_stages": staged.total_two_qubit_stages,
                "constant_depth": asdict(constant_depth_cost(staged, d_stage=d_stage)),
            }
        )
    return sets


def _synth_circuit(obs, part) -> Circuit:
    c = Circuit(obs.n_qubits, registers={"system": (0, obs.n_qubits)})
    for g, cl in enumerate(synthesize_partition(obs, part)):
        c.mark(f"set {g} signs={','.join('+1' if s > 0 else '-1' for s in cl.signs)}")
        staged = normal_form_stages(tableau_from_circuit(cl.gates, obs.n_qubits))
        for kind, gates in staged.stages:
            c.mark(f"stage {kind}")
            c.extend(clifford_gates(gates))
    return c


def cmd_partition(args) -> int:
    obs = parse_observable(args.observable)
    part, report = partition_parallel(obs, args.capacity)
    if args.format == "csv":
        d = report.to_dict()
        d.pop("set_size_histogram")
        _write(rows_to_csv("lcu-filling/1", tuple(d), [d]), args.output)
    else:
        _write(part.to_text(), args.output)
        log.info("%d sets, filling %.4f", report.set_count, report.filling_factor)
    return 0


def cmd_synth(args) -> int:
    obs = parse_observable(args.observable)
    part = _partition(args, obs)
    if args.format == "report":
        _write(to_report_text({"sets": _synth_payload(obs, part, args.d_stage)}), args.output)
    else:
        _write(_synth_circuit(obs, part).to_text(), args.output)
    return 0


def _build_select(args, obs, part=None):
    if args.mode == "serial":
        return build_select_serial(obs)
    part = part or _partition(args, obs)
    copies = obs.n_qubits if args.copies_convention == "n" else None
    return build_select_parallel(obs, part, copies=copies)


def cmd_build_select(args) -> int:
    obs = parse_observable(args.observable)
    c = _build_select(args, obs)
    if args.format == "report":
        _write(to_report_text(measure_circuit(c).to_dict()), args.output)
    else:
        _write(c.to_text(), args.output)
    return 0


def cmd_build_qrom(args) -> int:
    table = parse_qrom_table(args.table)
    c = build_qrom_serial(table) if args.mode == "serial" else build_qrom_parallel(table)
    if args.format == "report":
        _write(to_report_text(measure_circuit(c).to_dict()), args.output)
    else:
        _write(c.to_text(), args.output)
    return 0


def _verify_select(obs, part, args) -> dict:
    serial = build_select_serial(obs)
    parallel = build_select_parallel(obs, part)
    if parallel.n_qubits > args.qubit_cap:
        return {"status": "SKIPPED(size)", "qubits": parallel.n_qubits, "qubit_cap": args.qubit_cap}
    v = circuits_equivalent(
        serial, parallel, trials=args.trials, tolerance=args.tolerance, seed=args.seed, qubit_cap=args.qubit_cap
    )
    return {"status": "EQUIVALENT" if v.equivalent else "NOT_EQUIVALENT", **v.to_dict()}


def _verify_qrom(table) -> dict:
    import numpy as np

    serial, parallel = build_qrom_serial(table), build_qrom_parallel(table)
    inputs = np.arange(1 << table.address_width, dtype=np.int64)
    ok = bool(np.array_equal(classical_outputs(serial, inputs), classical_outputs(parallel, inputs)))
    return {"status": "EQUIVALENT" if ok else "NOT_EQUIVALENT", "inputs_checked": int(inputs.size)}


def cmd_verify(args) -> int:
    if args.qrom:
        verdict = _verify_qrom(parse_qrom_table(args.input))
    else:
        obs = parse_observable(args.input)
        verdict = _verify_select(obs, _partition(args, obs), args)
    _write(to_report_text(verdict), args.output)
    if verdict["status"] == "NOT_EQUIVALENT":
        raise VerificationError("serial and parallel circuits differ")
    return 0


def cmd_estimate(args) -> int:
    cfg = _config(args)
    if args.observable:
        obs = parse_observable(args.observable)
        report = estimate_from_partition(obs, _partition(args, obs), cfg)
    else:
        if None in (args.n, args.terms, args.sets):
            raise ParseError("give an observable file or all of --n, --terms, --sets")
        report = estimate_select(args.n, args.terms, args.sets, cfg, max_set_size=args.max_set_size)
    text = report_to_csv(report) if args.format == "csv" else to_report_text(report.to_dict())
    _write(text, args.output)
    return 0


def cmd_sweep_qrom(args) -> int:
    rows = qrom_filling_sweep(args.max_n, args.min_n, jobs=args.jobs)
    # plain text output for a sweep is its CSV
    if args.format == "report":
        _write(to_report_text({"rows": [asdict(r) for r in rows], "summary": sweep_summary(rows)}), args.output)
    else:
        _write(sweep_to_csv(rows), args.output)
    return 0


def cmd_pipeline(args) -> int:
    out = Path(args.output or "lcu-out")
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config(args)
    manifest = RunManifest("pipeline", seed=args.seed, config={**cfg.to_dict(), "capacity": args.capacity})
    manifest.add_input(args.observable)
    obs = parse_observable(args.observable)
    part = _partition(args, obs)
    (out / "partition.json").write_text(part.to_text(), encoding="utf-8")
    (out / "cliffords.txt").write_text(_synth_circuit(obs, part).to_text(), encoding="utf-8")
    serial = build_select_serial(obs)
    parallel = build_select_parallel(obs, part)
    (out / "select_serial.txt").write_text(serial.to_text(), encoding="utf-8")
    (out / "select_parallel.txt").write_text(parallel.to_text(), encoding="utf-8")
    verdict = _verify_select(obs, part, args)
    (out / "verdict.json").write_text(to_report_text(verdict), encoding="utf-8")
    report = estimate_from_partition(obs, part, cfg)
    payload = {
        "model": report.to_dict(),
        "measured_serial": measure_circuit(serial, cfg).to_dict(),
        "measured_parallel": measure_circuit(parallel, cfg).to_dict(),
        "ingestion": obs.stats,
        "identity_coefficient": part.identity_coefficient,
    }
    (out / "report.json").write_text(to_report_text(payload), encoding="utf-8")
    (out / "report.csv").write_text(report_to_csv(report), encoding="utf-8")
    (out / "manifest.json").write_text(manifest.to_text(), encoding="utf-8")
    sys.stdout.write(to_report_text({"output": str(out), "verification": verdict["status"]}))
    if verdict["status"] == "NOT_EQUIVALENT":
        raise VerificationError("serial and parallel SELECT differ")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--capacity", type=int, default=None, help="parallel set size cap (default: n_qubits)")
    common.add_argument("--copies-convention", choices=("n", "max_set_size"), default="n")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    common.add_argument("--qubit-cap", type=int, default=DEFAULT_QUBIT_CAP)
    common.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    common.add_argument("--format", choices=("csv", "report", "text"), default="text")
    common.add_argument("--t-per-control-pair", type=int, default=4)
    common.add_argument("--unary-iteration", action="store_true")
    common.add_argument("--d-stage", type=int, default=4)
    common.add_argument("--partition", help="reuse a saved partition file")
    common.add_argument("-o", "--output", help="output file (directory for pipeline)")

    p = argparse.ArgumentParser(prog="lcu-parallel", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("partition", parents=[common], help="group terms into parallel sets")
    s.add_argument("observable")
    s.set_defaults(func=cmd_partition)

    s = sub.add_parser("synth", parents=[common], help="diagonalising Clifford per set, in staged form")
    s.add_argument("observable")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("build-select", parents=[common], help="emit a SELECT circuit")
    s.add_argument("observable")
    s.add_argument("--mode", choices=("serial", "parallel"), default="parallel")
    s.set_defaults(func=cmd_build_select)

    s = sub.add_parser("build-qrom", parents=[common], help="emit a QROM circuit")
    s.add_argument("table")
    s.add_argument("--mode", choices=("serial", "parallel"), default="parallel")
    s.set_defaults(func=cmd_build_qrom)

    s = sub.add_parser("verify", parents=[common], help="check serial and parallel circuits agree")
    s.add_argument("input")
    s.add_argument("--qrom", action="store_true", help="input is a QROM table")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("estimate", parents=[common], help="resource report")
    s.add_argument("observable", nargs="?")
    s.add_argument("--n", type=int)
    s.add_argument("--terms", type=int)
    s.add_argument("--sets", type=int)
    s.add_argument("--max-set-size", type=int)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("sweep-qrom", parents=[common], help="filling factor over all n-bit patterns")
    s.add_argument("--max-n", type=int, default=14)
    s.add_argument("--min-n", type=int, default=2)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep_qrom)

    s = sub.add_parser("pipeline", parents=[common], help="partition, synthesise, build, verify and estimate")
    s.add_argument("observable")
    s.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except LcuError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
