"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 degenerate linear system,
4 file or schema error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fileio, pipeline
from .design import assemble
from .exceptions import DegenerateSystemError, SchemaError, ValidationError

EXIT_OK, EXIT_VALIDATION, EXIT_DEGENERATE, EXIT_FILE = 0, 2, 3, 4


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _counts(args, cfg, gs):
    if args.counts:
        return fileio.read_counts(args.counts, gs.n_qubits)
    return pipeline.load_counts_for(cfg, gs)


def cmd_gen_circuits(args) -> None:
    cfg = pipeline.ExperimentConfig.load(args.config)
    circuits = pipeline.generate_circuits(cfg, test=args.test, seed=args.seed)
    fileio.write_circuits(args.out, circuits)


def cmd_simulate(args) -> None:
    cfg = pipeline.ExperimentConfig.load(args.config)
    circuits = fileio.read_circuits(args.circuits)
    table = pipeline.simulate_counts(cfg, circuits, args.shots, args.seed)
    fileio.write_counts(args.out, table, cfg.ideal_gateset().n_qubits)


def cmd_estimate(args) -> None:
    cfg = pipeline.ExperimentConfig.load(args.config)
    circuits = fileio.read_circuits(args.circuits)
    counts = _counts(args, cfg, cfg.ideal_gateset())
    report = pipeline.estimate_report(cfg, circuits, counts, args.sv_tol)
    for w in report["warnings"]:
        _warn(w)
    fileio.write_json(args.out, report)
    if args.design_out:
        ds = assemble(cfg.ideal_gateset(), circuits, counts)
        fileio.write_json(args.design_out, {"schema_version": fileio.SCHEMA_VERSION, "kind": "design", **ds.to_dict()})


def cmd_predict(args) -> None:
    report = fileio.read_json(args.report)
    circuits = fileio.read_circuits(args.circuits)
    reference = truth = None
    if args.counts:
        reference = fileio.read_counts(args.counts)
    elif args.config:
        cfg = pipeline.ExperimentConfig.load(args.config)
        if cfg.noise is not None:
            truth = pipeline.true_model(cfg).gateset
    fileio.write_json(args.out, pipeline.predictions(report, circuits, reference, truth))


def cmd_gauge_check(args) -> None:
    report = fileio.read_json(args.report)
    fileio.write_json(args.out, pipeline.gauge_check(report))


def cmd_bootstrap(args) -> None:
    cfg = pipeline.ExperimentConfig.load(args.config)
    B = cfg.bootstrap if args.bootstrap is None else args.bootstrap
    if B == 0:
        _warn("bootstrap B = 0; nothing to do")
        return
    circuits = fileio.read_circuits(args.circuits)
    counts = _counts(args, cfg, cfg.ideal_gateset())
    seed = cfg.seed if args.seed is None else args.seed
    fileio.write_json(args.out, pipeline.bootstrap_errors(cfg, circuits, counts, B, seed, args.sv_tol))


def cmd_run(args) -> None:
    """gen-circuits, simulate (unless ingesting counts), estimate, and predict if test circuits are configured."""
    cfg = pipeline.ExperimentConfig.load(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gs = cfg.ideal_gateset()
    circuits = pipeline.generate_circuits(cfg)
    fileio.write_circuits(out / "circuits.jsonl", circuits)
    if cfg.noise is not None:
        counts = pipeline.simulate_counts(cfg, circuits, args.shots, args.seed)
        fileio.write_counts(out / "counts.json", counts, gs.n_qubits)
    else:
        counts = pipeline.load_counts_for(cfg, gs)
    report = pipeline.estimate_report(cfg, circuits, counts, args.sv_tol)
    for w in report["warnings"]:
        _warn(w)
    fileio.write_json(out / "report.json", report)
    if cfg.test_circuits is not None:
        tests = pipeline.generate_circuits(cfg, test=True)
        fileio.write_circuits(out / "test_circuits.jsonl", tests)
        truth = pipeline.true_model(cfg).gateset if cfg.noise is not None else None
        fileio.write_json(out / "predictions.json", pipeline.predictions(report, tests, None, truth))
    B = cfg.bootstrap if args.bootstrap is None else args.bootstrap
    if B > 0 and counts.shots > 0:
        seed = cfg.seed if args.seed is None else args.seed
        fileio.write_json(
            out / "bootstrap.json", pipeline.bootstrap_errors(cfg, circuits, counts, B, seed, args.sv_tol)
        )
    elif B > 0:
        _warn("exact probabilities have no shot noise; bootstrap skipped")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rlgst", description="Randomized linear gate set tomography.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = command("gen-circuits", cmd_gen_circuits, "draw random tomographic (or --test) circuits")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--test", action="store_true", help="use the config's test_circuits section")
    p.add_argument("--seed", type=_u64)

    p = command("simulate", cmd_simulate, "simulate counts under the configured true noise")
    p.add_argument("--config", required=True)
    p.add_argument("--circuits", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--shots", type=_nonneg, help="0 stores exact probabilities")
    p.add_argument("--seed", type=_u64)

    p = command("estimate", cmd_estimate, "linear-inversion estimate and report")
    p.add_argument("--config", required=True)
    p.add_argument("--circuits", required=True)
    p.add_argument("--counts", help="defaults to the config's counts path")
    p.add_argument("--out", required=True)
    p.add_argument("--sv-tol", type=float)
    p.add_argument("--design-out", help="also dump C, p and p~ with row and column labels")

    p = command("predict", cmd_predict, "predict test-circuit outcomes from a report")
    p.add_argument("--report", required=True)
    p.add_argument("--circuits", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--counts", help="reference counts for the test circuits")
    p.add_argument("--config", help="use the config's true noise as an exact reference")

    p = command("gauge-check", cmd_gauge_check, "test every null-space vector for gauge membership")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)

    p = command("bootstrap", cmd_bootstrap, "parametric-bootstrap error bars")
    p.add_argument("--config", required=True)
    p.add_argument("--circuits", required=True)
    p.add_argument("--counts")
    p.add_argument("--out", required=True)
    p.add_argument("--bootstrap", type=_nonneg, metavar="B")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--sv-tol", type=float)

    p = command("run", cmd_run, "full pipeline into an output directory")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--shots", type=_nonneg)
    p.add_argument("--seed", type=_u64)
    p.add_argument("--sv-tol", type=float)
    p.add_argument("--bootstrap", type=_nonneg, metavar="B")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except DegenerateSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (SchemaError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
