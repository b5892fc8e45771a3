#!/usr/bin/env python3
"""
reks command-line driver.

Every command reads a RunInput (from --input or --preset), runs its checks
through the VerificationService and writes a RunReport as JSON or CSV.
Exit code 0 when every check passes, 1 on a counterexample, 2 on bad input.
"""

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import pydantic
import structlog
import ujson

from .core.exceptions import BoundError, CheckFailure, ReksError, SchemaError, ValidationError
from .core.logging_config import configure_logging
from .core.version import load_version_info
from .models.inputs import RunInput
from .models.reports import RunReport
from .services import SCENARIOS, VerificationService


logger = structlog.get_logger()

VERIFY_COMMANDS = ["dt-linearity", "dt-conn", "swallow", "sym", "split-ext", "split-pa"]
S21_COMMANDS = ["enumerate", "verify-split", "trace-conn"]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON file with a RunInput")
    common.add_argument("--preset", help=f"Named run: {', '.join(sorted(SCENARIOS))}")
    common.add_argument("--out", help="Write the report here instead of stdout")
    common.add_argument("--dim", type=int, help="Truncation window (default REKS_MAX_DIM)")
    common.add_argument("--seed", type=int, help="Random seed for sampled checks")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--log-level", help="Override REKS_LOG_LEVEL")

    parser = argparse.ArgumentParser(
        prog="reks",
        description="Equivariant connectivity and Real K-theory checks at desk scale",
    )
    parser.add_argument("--version", action="version", version=load_version_info().banner())
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("conn", parents=[common], help="Equivariant connectivity of a map")
    sub.add_parser("bredon", parents=[common], help="Bredon homology via Dold-Thom")
    sub.add_parser("trace-conn", parents=[common], help="Connectivity of the wedge-to-sum trace")
    bounds = sub.add_parser("bounds", parents=[common], help="Excision, wedge and certificate calculators")
    bounds.add_argument("--cert", help="Named analyticity certificate (rho0)")
    bounds.add_argument("--smash", action="append", default=[], help="Sphere to smash with (S1, S11, rho)")

    verify = sub.add_parser("verify", help="Structural verifications")
    verify_sub = verify.add_subparsers(dest="check", required=True)
    for name in VERIFY_COMMANDS:
        verify_sub.add_parser(name, parents=[common])

    s21 = sub.add_parser("s21", help="S^{2,1}-construction at small degree")
    s21_sub = s21.add_subparsers(dest="check", required=True)
    for name in S21_COMMANDS:
        s21_sub.add_parser(name, parents=[common])
    return parser


def load_input(path: Optional[str], preset: Optional[str], required: bool = True) -> Optional[RunInput]:
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = ujson.loads(Path(path).read_text())
        except (OSError, ValueError) as e:
            raise SchemaError(f"cannot read input {path}: {e}")
        if not isinstance(data, dict) or not data:
            raise SchemaError(f"input {path} is empty")
    if preset is not None:
        data.setdefault("preset", preset)
    if not data:
        if required:
            raise SchemaError("no input given; pass --input or --preset")
        return None
    try:
        return RunInput(**data)
    except pydantic.ValidationError as e:
        raise SchemaError(f"input does not match the schema: {e}")


def run_command(args: argparse.Namespace) -> RunReport:
    service = VerificationService(dim=args.dim, seed=args.seed)
    command = args.command
    if command == "bounds":
        run = load_input(args.input, args.preset, required=args.cert is None)
        return service.bounds(args.cert, args.smash, run)
    run = load_input(args.input, args.preset)
    if command == "conn":
        return service.conn(run)
    if command == "bredon":
        return service.bredon(run)
    if command == "trace-conn":
        return service.trace_conn(run)
    check = args.check
    if command == "verify":
        handlers = {
            "dt-linearity": service.verify_dt_linearity,
            "dt-conn": service.verify_dt_conn,
            "swallow": service.verify_swallow,
            "sym": service.verify_sym,
            "split-ext": service.verify_split_ext,
            "split-pa": service.verify_split_pa,
        }
        return handlers[check](run)
    if check == "enumerate":
        return service.s21_enumerate(run)
    if check == "verify-split":
        return service.verify_split_pa(run, command="s21 verify-split")
    return service.trace_conn(run, command="s21 trace-conn")


def _flatten(prefix: str, value: Any) -> Iterable[Tuple[str, Any]]:
    if isinstance(value, dict):
        for k in sorted(value):
            yield from _flatten(f"{prefix}.{k}" if prefix else str(k), value[k])
    elif isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        for i, v in enumerate(value):
            yield from _flatten(f"{prefix}[{i}]", v)
    else:
        yield prefix, value


def render(report: RunReport, fmt: str) -> str:
    data = report.model_dump(mode="json")
    if fmt == "json":
        return ujson.dumps(data, sort_keys=True, indent=2, escape_forward_slashes=False) + "\n"
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["section", "key", "value"])
    for key in ("command", "version", "seed", "dim"):
        writer.writerow(["run", key, data[key]])
    for check in data["checks"]:
        writer.writerow(["check", check["name"], check["status"]])
        writer.writerow(["check", f"{check['name']}.checked", check["checked"]])
        if check.get("counterexample"):
            writer.writerow(["check", f"{check['name']}.counterexample", check["counterexample"]["message"]])
    for key, value in _flatten("", data["results"]):
        writer.writerow(["result", key, ujson.dumps(value) if isinstance(value, list) else value])
    return out.getvalue()


def emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(level=args.log_level)
    try:
        report = run_command(args)
        emit(render(report, args.format), args.out)
        if not report.passed:
            failure = report.first_failure()
            raise CheckFailure(
                failure.counterexample.message if failure.counterexample else failure.name,
                failure.model_dump(mode="json"),
            )
    except CheckFailure as e:
        logger.error("check_failed", command=args.command, error=str(e), payload=e.payload)
        return CheckFailure.exit_code
    except (SchemaError, ValidationError, BoundError) as e:
        logger.error("input_rejected", command=args.command, error=str(e))
        sys.stderr.write(f"reks: {e}\n")
        return SchemaError.exit_code
    except ReksError as e:
        logger.error("run_failed", command=args.command, error=str(e))
        sys.stderr.write(f"reks: {e}\n")
        return SchemaError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
