"""``deepnorm-lab`` command line: gains, verify, train, fit.

Every successful command prints exactly one JSON document carrying
``schema_version`` on stdout; logs go to stderr. Exit status is 0 on success,
1 when a verification check fails (or, with ``train --strict``, a run
diverges) and 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import math
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, TextIO

from pydantic import ValidationError

from deepnorm_lab.config.errors import ConfigError, ConfigFileNotFoundError, MalformedDocumentError
from deepnorm_lab.config.loader import load_experiment_config, load_verify_config
from deepnorm_lab.config.models import ArchShape, LoggingSettings
from deepnorm_lab.experiments.scaling import fit_log_scaling
from deepnorm_lab.experiments.suites import SUITES, run_suite
from deepnorm_lab.experiments.sweep import INDEX_FILE, run_sweep
from deepnorm_lab.norm.gains import compute_gains
from deepnorm_lab.observability.logging import (
    FORMAT_ENV_VAR,
    LEVEL_ENV_VAR,
    bootstrap_logging,
    get_event_logger,
)
from deepnorm_lab.runtime.errors import FitError, InputError, SweepError

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

_logger = get_event_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepnorm-lab",
        description="DeepNorm gains, bound verification and stability sweeps",
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help=f"Log level (default: ${LEVEL_ENV_VAR}, config, then INFO)",
    )
    parser.add_argument(
        "--log-format",
        choices=["json", "text"],
        help=f"Log format on stderr (default: ${FORMAT_ENV_VAR}, config, then json)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gains = commands.add_parser("gains", help="Print DeepNorm alpha and beta")
    gains.add_argument(
        "--arch", required=True, choices=["encoder_only", "decoder_only", "encoder_decoder"]
    )
    gains.add_argument("--n", type=int, help="Encoder layers")
    gains.add_argument("--m", type=int, help="Decoder layers")
    form = gains.add_mutually_exclusive_group()
    form.add_argument("--exact", dest="form", action="store_const", const="exact")
    form.add_argument("--rounded", dest="form", action="store_const", const="rounded")
    gains.set_defaults(form="exact")

    verify = commands.add_parser("verify", help="Run a verification suite")
    verify.add_argument("--suite", required=True, choices=list(SUITES))
    verify.add_argument("--config", type=Path, help="VerifyConfig JSON (defaults if omitted)")

    train = commands.add_parser("train", help="Run a training sweep")
    train.add_argument("--config", type=Path, required=True, help="ExperimentConfig JSON")
    train.add_argument("--out", type=Path, required=True, help="Output directory")
    train.add_argument("--workers", type=int, help="Concurrent runs (default: $DEEPNORM_WORKERS)")
    train.add_argument("--strict", action="store_true", help="Exit 1 if any run diverged")

    fit = commands.add_parser("fit", help="Fit L(d) = A log(d) + B")
    fit.add_argument("--points", type=Path, required=True, help="JSON [[depth, score], ...]")
    return parser


def _configure_logging(args: argparse.Namespace, settings: LoggingSettings | None) -> None:
    level = args.log_level or os.getenv(LEVEL_ENV_VAR) or (settings.level if settings else None)
    log_format = (
        args.log_format or os.getenv(FORMAT_ENV_VAR) or (settings.format if settings else None)
    )
    bootstrap_logging(level=level, log_format=log_format)


def jsonable(value: Any) -> Any:
    """Replace non-finite floats with their string form so output stays strict JSON."""
    if isinstance(value, float):
        return value if math.isfinite(value) else str(value)
    if isinstance(value, dict):
        return {key: jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    return value


def emit(document: dict[str, Any], stream: TextIO | None = None) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **document}
    target = stream if stream is not None else sys.stdout
    target.write(json.dumps(jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n")


def _fail_usage(message: str) -> int:
    sys.stderr.write(f"deepnorm-lab: error: {message}\n")
    return EXIT_USAGE


def cmd_gains(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    _configure_logging(args, None)
    try:
        arch = ArchShape(kind=args.arch, n=args.n, m=args.m)
    except ValidationError as exc:
        parser.error("; ".join(str(error["msg"]) for error in exc.errors()))
    gains = compute_gains(arch, args.form)
    document: dict[str, Any] = {
        "arch": arch.model_dump(exclude_none=True),
        "form": args.form,
    }
    if gains.alpha_enc is not None:
        document["encoder"] = {"alpha": gains.alpha_enc, "beta": gains.beta_enc}
        if gains.alpha_enc_clamped:
            document["encoder"]["residual_alpha"] = gains.residual_alpha_enc
    if gains.alpha_dec is not None:
        document["decoder"] = {"alpha": gains.alpha_dec, "beta": gains.beta_dec}
    if arch.kind != "encoder_decoder":
        document.update(document["encoder" if arch.kind == "encoder_only" else "decoder"])
    emit(document)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    _configure_logging(args, None)
    try:
        config = load_verify_config(args.config)
    except ConfigError as exc:
        return _fail_usage(str(exc))
    _configure_logging(args, config.logging)
    report = run_suite(args.suite, config)
    emit(report.to_dict(include_timing=False))
    return EXIT_OK if report.passed else EXIT_FAILED


def _check_writable(directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    probe = directory / ".deepnorm-write-check"
    probe.write_text("", encoding="utf-8")
    probe.unlink()


def cmd_train(args: argparse.Namespace) -> int:
    _configure_logging(args, None)
    try:
        config = load_experiment_config(args.config)
    except ConfigError as exc:
        return _fail_usage(str(exc))
    _configure_logging(args, config.logging)
    try:
        _check_writable(args.out)
    except OSError as exc:
        return _fail_usage(f"output directory {args.out} is not writable: {exc}")
    try:
        index = asyncio.run(run_sweep(config, args.out, workers=args.workers))
    except InputError as exc:
        return _fail_usage(str(exc))
    except SweepError as exc:
        for run_id, error in exc.errors.items():
            _logger.error("run_failed", run_id=run_id, error=str(error))
        return EXIT_FAILED

    runs = index["runs"]
    diverged = sum(1 for entry in runs if entry["diverged"])
    emit(
        {
            "name": index["name"],
            "out": str(args.out),
            "index": INDEX_FILE,
            "runs": len(runs),
            "diverged": diverged,
            "summary": index["summary"],
        }
    )
    return EXIT_FAILED if args.strict and diverged else EXIT_OK


def _read_points(path: Path) -> list[tuple[float, float]]:
    if not path.exists():
        raise ConfigFileNotFoundError(str(path))
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(str(path), f"Malformed JSON: {exc}") from exc
    if isinstance(payload, dict):
        payload = payload.get("points")
    if not isinstance(payload, list):
        raise MalformedDocumentError(str(path), "expected a list of [depth, score] pairs")
    points = []
    for item in payload:
        if not (isinstance(item, list) and len(item) == 2):
            raise MalformedDocumentError(str(path), f"expected a [depth, score] pair, got {item!r}")
        try:
            points.append((float(item[0]), float(item[1])))
        except (TypeError, ValueError) as exc:
            raise MalformedDocumentError(str(path), f"non-numeric point {item!r}") from exc
    return points


def cmd_fit(args: argparse.Namespace) -> int:
    _configure_logging(args, None)
    try:
        fit = fit_log_scaling(_read_points(args.points))
    except (ConfigError, FitError) as exc:
        return _fail_usage(str(exc))
    emit(fit.to_dict())
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gains":
        return cmd_gains(args, parser)
    if args.command == "verify":
        return cmd_verify(args)
    if args.command == "train":
        return cmd_train(args)
    return cmd_fit(args)

