"""Command-line interface: compute, sweep, verify and export-frames.

Exit codes are 0 on success, 1 on any failure (bad input, a gap closing,
a failed check, I/O) and 2 when methods computing the same invariant
disagree.
"""

import argparse
import csv
import io
import json
import logging
import sys
import time
from asyncio import run
from typing import Any, Dict, List, Optional, Sequence, Tuple

import voluptuous as vol

from python_blochobs import const
from python_blochobs.config import RunConfig
from python_blochobs.exceptions import BlochObsError, GapClosed, ParseError
from python_blochobs.frames import (
    boundary_frame_chern,
    boundary_frame_trs,
    obstruction_chern,
    obstruction_trs,
    sweep_frame,
)
from python_blochobs.invariants import METHODS, InvariantResult, verify_model
from python_blochobs.models import BUILTIN_SCHEMAS, BlochModel, build_model
from python_blochobs.serialization import dump_frames, load_model
from python_blochobs.sweep import run_sweep

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_DISAGREEMENT = 2

_CHECK_COLUMNS = ("name", "residual", "threshold", "passed", "detail")

_TOLERANCE_FLAGS = (
    "herm",
    "rank",
    "unitary",
    "branch",
    "gauge",
    "gap",
    "cont",
    "compat",
    "snap",
    "step",
)


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit 1 instead of 2."""

    def error(self, message: str) -> Any:
        """Raise instead of exiting."""
        raise ParseError(f"({message})")


def parse_value(text: str) -> Any:
    """Parse a parameter value: a boolean, an angle literal or a number.

    >>> parse_value("-pi/2")
    -1.5707963267948966
    """
    lowered = text.strip().lower()
    if lowered in ("true", "false"):
        return lowered == "true"

    sign, body = (-1.0, lowered[1:]) if lowered.startswith("-") else (1.0, lowered)
    if body in const.ANGLE_LITERALS:
        return sign * const.ANGLE_LITERALS[body]
    try:
        number = float(lowered)
    except ValueError as err:
        raise ParseError(f"(cannot parse value {text!r})") from err
    return int(number) if number.is_integer() and "." not in lowered else number


def parse_params(text: Optional[str]) -> Dict[str, Any]:
    """Parse "k=v[,k=v...]" into a parameter map."""
    params: Dict[str, Any] = {}
    if not text:
        return params
    for item in text.split(","):
        name, separator, value = item.partition("=")
        if not separator or not name.strip():
            raise ParseError(f"(expected name=value, got {item!r})")
        params[name.strip()] = parse_value(value)
    return params


def parse_sweep_axis(text: str) -> Dict[str, Any]:
    """Parse a "NAME:START:STOP:STEPS" sweep axis."""
    fields = text.split(":")
    if len(fields) != 4:
        raise ParseError(f"(expected NAME:START:STOP:STEPS, got {text!r})")
    name, start, stop, steps = fields
    return {
        "name": name,
        "start": parse_value(start),
        "stop": parse_value(stop),
        "steps": int(steps),
    }


def _common_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--model", choices=sorted(BUILTIN_SCHEMAS))
    parser.add_argument("--params", help="k=v[,k=v...]; pi, pi/2, pi/3, pi/4 allowed")
    parser.add_argument("--model-file", help="hopping file (JSON)")
    parser.add_argument("--grid", type=int, default=64, help="grid size N")
    parser.add_argument(
        "--invariant", choices=sorted(const.INVARIANT_METHODS), default="all"
    )
    parser.add_argument(
        "--methods",
        default="all",
        help="comma separated subset of " + ",".join(const.ALL_METHODS + ("all",)),
    )
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    for name in _TOLERANCE_FLAGS:
        parser.add_argument(f"--tol-{name}", type=float, dest=f"tol_{name}")
    parser.add_argument("--max-grid", type=int)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--verbose", action="store_true", help="log at INFO")
    parser.add_argument("--debug", action="store_true", help="log at DEBUG")
    return parser


def build_parser() -> argparse.ArgumentParser:
    """Return the blochobs argument parser."""
    parser = _Parser(prog="blochobs", description=__doc__.splitlines()[0])
    verbs = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    common = _common_flags()
    verbs.add_parser("compute", parents=[common], help="compute invariants")
    sweep = verbs.add_parser("sweep", parents=[common], help="sweep parameters")
    sweep.add_argument(
        "--sweep",
        action="append",
        type=parse_sweep_axis,
        default=[],
        metavar="NAME:START:STOP:STEPS",
    )
    verbs.add_parser("verify", parents=[common], help="run diagnostics")
    export = verbs.add_parser("export-frames", parents=[common], help="write frames")
    export.add_argument("--target", choices=["boundary", "cell"], default="boundary")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Validate parsed arguments into a RunConfig.

    Raises:
        ParseError: The arguments do not form a valid run.
    """
    tolerances = {
        name: getattr(args, f"tol_{name}")
        for name in _TOLERANCE_FLAGS
        if getattr(args, f"tol_{name}") is not None
    }
    if args.max_grid is not None:
        tolerances["max_grid"] = args.max_grid

    raw = {
        "model": args.model,
        "params": parse_params(args.params),
        "model_file": args.model_file,
        "invariant": args.invariant,
        "methods": [item.strip() for item in args.methods.split(",") if item.strip()],
        "grid": args.grid,
        "out": args.out,
        "format": args.format,
        "sweep": getattr(args, "sweep", []),
        "tolerances": tolerances,
        "target": getattr(args, "target", "boundary"),
        "seed": args.seed,
    }
    try:
        return RunConfig.from_dict(raw)
    except vol.Invalid as err:
        raise ParseError(f"({err})") from err


def load_run_model(config: RunConfig) -> BlochModel:
    """Build the model a run refers to."""
    if config.model_file is not None:
        return load_model(config.model_file)
    assert config.model is not None
    return build_model(config.model, config.params)


def _error_record(err: BlochObsError) -> Dict[str, Any]:
    record: Dict[str, Any] = {"type": type(err).__name__, "message": str(err)}
    if isinstance(err, GapClosed):
        record["momentum"] = list(err.momentum)
        record["gap"] = err.gap
    return record


def agreement_checks(results: Sequence[InvariantResult]) -> List[Dict[str, Any]]:
    """Compare the values of methods that compute the same invariant."""
    checks = []
    for invariant in ("chern", "z2"):
        values = {
            result.method: result.value
            for result in results
            if result.method in const.INVARIANT_METHODS[invariant]
        }
        if len(values) > 1:
            checks.append(
                {
                    "name": f"{invariant}_agreement",
                    "passed": len(set(values.values())) == 1,
                    "values": values,
                }
            )
    return checks


def _csv_text(records: List[Dict[str, Any]], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(
        buffer,
        fieldnames=list(columns),
        extrasaction="ignore",
        lineterminator="\n",
    )
    writer.writeheader()
    writer.writerows(records)
    return buffer.getvalue()


def emit(
    config: RunConfig,
    report: Dict[str, Any],
    records: List[Dict[str, Any]],
    columns: Optional[Sequence[str]] = None,
) -> None:
    """Write a report to --out or stdout in the configured format.

    CSV rows hold the parameters sorted by name followed by the result
    columns, unless other columns are given.
    """
    if config.format == "csv":
        if columns is None:
            columns = sorted(config.params) + list(const.CSV_RESULT_COLUMNS)
        text = _csv_text(records, columns)
    else:
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"

    if config.out is None:
        sys.stdout.write(text)
        return
    with open(config.out, "w", encoding="utf-8") as handle:
        handle.write(text)
    _LOGGER.debug("wrote %s", config.out)


def _applicable(config: RunConfig, model: BlochModel) -> Tuple[str, ...]:
    """Drop the Z2 methods for models without time reversal unless asked for."""
    if config.invariant != "all" or model.has_trs:
        return config.methods
    skipped = [method for method in config.methods if method in const.Z2_METHODS]
    if skipped:
        _LOGGER.info("no time-reversal data, skipping %s", ", ".join(skipped))
    return tuple(method for method in config.methods if method not in skipped)


def cmd_compute(config: RunConfig) -> Tuple[int, Dict[str, Any]]:
    """Run the selected methods on one model."""
    report: Dict[str, Any] = {"config": config.describe(), "results": [], "checks": []}
    results: List[InvariantResult] = []
    try:
        model = load_run_model(config)
        for method in _applicable(config, model):
            start = time.perf_counter()
            result = METHODS[method](model, config.grid, config.tolerances)
            wall_ms = 1000 * (time.perf_counter() - start)
            _LOGGER.info("%s: %d (raw %.6f)", method, result.value, result.raw)
            results.append(result)
            report["results"].append({**result.as_dict(), "wall_ms": wall_ms})
    except BlochObsError as err:
        _LOGGER.error("%s", err)
        report["error"] = _error_record(err)
        return EXIT_FAILURE, report

    report["checks"] = agreement_checks(results)
    if all(check["passed"] for check in report["checks"]):
        return EXIT_OK, report
    _LOGGER.error("methods disagree: %s", report["checks"])
    return EXIT_DISAGREEMENT, report


def cmd_sweep(config: RunConfig) -> Tuple[int, Dict[str, Any], List[Dict[str, Any]]]:
    """Compute the selected methods over the sweep grid."""
    if not config.sweep:
        raise ParseError("(sweep needs at least one --sweep axis)")
    rows = run(run_sweep(config))
    records = [record for row in rows for record in row.records(config.methods)]
    report = {
        "config": config.describe(),
        "results": records,
        "checks": [
            {"params": row.params, "status": row.status, "detail": row.detail}
            for row in rows
            if row.status != "ok"
        ],
    }
    return EXIT_OK, report, records


def cmd_verify(config: RunConfig) -> Tuple[int, Dict[str, Any]]:
    """Run every diagnostic on one model."""
    report: Dict[str, Any] = {"config": config.describe(), "results": [], "checks": []}
    try:
        model = load_run_model(config)
        checks = verify_model(model, config.grid, config.tolerances, config.seed)
    except BlochObsError as err:
        _LOGGER.error("%s", err)
        report["error"] = _error_record(err)
        return EXIT_FAILURE, report

    report["checks"] = [
        {
            "name": check.name,
            "residual": check.residual,
            "threshold": check.threshold,
            "passed": check.passed,
            "detail": check.detail,
        }
        for check in checks.checks
    ]
    failure = checks.first_failure
    if failure is None:
        return EXIT_OK, report
    _LOGGER.error("check %s failed: residual %.3e", failure.name, failure.residual)
    report["first_failure"] = failure.name
    return EXIT_FAILURE, report


def cmd_export_frames(config: RunConfig) -> int:
    """Write the input frame, and with --target boundary Φ̂, Û and U_obs."""
    if config.out is None:
        raise ParseError("(export-frames needs --out)")
    model = load_run_model(config)
    cell = const.CELL_HALF if model.has_trs else const.CELL_FULL
    psi = sweep_frame(model, config.grid, cell, tolerances=config.tolerances)
    if psi.max_jump > config.tolerances.cont:
        _LOGGER.warning(
            "frame jump %.3f exceeds %.3f", psi.max_jump, config.tolerances.cont
        )

    if config.target == "cell":
        dump_frames(config.out, psi)
        return EXIT_OK

    if model.has_trs:
        obstructions = obstruction_trs(psi, model, config.tolerances)
        boundary = boundary_frame_trs(psi, obstructions, model, config.tolerances)
    else:
        assert model.tau is not None
        obstructions = obstruction_chern(psi, model.tau, config.tolerances)
        boundary = boundary_frame_chern(psi, obstructions, model.tau, config.tolerances)
    dump_frames(config.out, psi, boundary, obstructions)
    return EXIT_OK


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.WARNING
    if getattr(args, "debug", False):
        level = logging.DEBUG
    elif getattr(args, "verbose", False):
        level = logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args)
        config = config_from_args(args)
        if args.verb == "compute":
            code, report = cmd_compute(config)
            records = [{**config.params, **record} for record in report["results"]]
            emit(config, report, records)
        elif args.verb == "sweep":
            code, report, records = cmd_sweep(config)
            emit(config, report, records)
        elif args.verb == "verify":
            code, report = cmd_verify(config)
            emit(config, report, report["checks"], _CHECK_COLUMNS)
        else:
            code = cmd_export_frames(config)
    except BlochObsError as err:
        sys.stderr.write(f"blochobs: {err}\n")
        return EXIT_FAILURE
    except OSError as err:
        sys.stderr.write(f"blochobs: {err}\n")
        return EXIT_FAILURE
    return code


def main_entry() -> None:
    """Console-script entry point."""
    sys.exit(main())
