"""
Command-line front end for orbit-bounds.

Usage::

    orbit-bounds tau example_split.yaml
    orbit-bounds bounds example_qi.yaml --format json
    orbit-bounds defects example_split.yaml --constants b=1/2
    orbit-bounds classify family.lst --threshold 10
    orbit-bounds intersect family.lst
    orbit-bounds oracle

Environment Variables:
    ORBIT_BOUNDS_CACHE          : default for ``--cache``
    ORBIT_BOUNDS_PRECISION_MAX  : default for ``--precision-max``
    ORBIT_BOUNDS_WORKERS        : default for ``--workers`` (classify, default 4)
    LOG_LEVEL, LOG_FILE, LOG_FORMAT, ROLLBAR_SERVER_TOKEN

Exit codes: 0 success, 1 unexpected failure or failed oracle, 2 parse or
validation error, 3 precision not stabilised, 4 unsupported case.
"""

import argparse
import logging
import os
import sys
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from dataclasses import replace
from fractions import Fraction

from common.logging_config import setup_logging
from common.rollbar_config import initialize_rollbar
from common.utils import parse_rational

from orbit_bounds.errors import InstanceError
from orbit_bounds.field_cache import FieldCache
from orbit_bounds.invariants import (
    bounds_report,
    classify_sequence,
    evaluate_primes,
    intersect_levels,
    minimize_over_coset,
    splitting_discriminant,
    test_invariant,
)
from orbit_bounds_cli.decorators.track_errors import track_errors
from orbit_bounds_cli.instance import Instance, load_instance, load_list
from orbit_bounds_cli.oracle import run_oracle_checks
from orbit_bounds_cli.rendering import (
    bounds_report_out,
    classify_report,
    defects_report,
    intersect_report,
    oracle_report,
    render,
    tau_report,
)

logger = logging.getLogger(__name__)

CONSTANT_NAMES = {"b": "b", "cN": "c_N", "c_N": "c_N", "c0": "c_0", "c_0": "c_0", "N": "N"}
DEFAULT_WORKERS = "4"


def parse_constants(text: str) -> dict[str, Fraction | int]:
    """
    Parse ``b=...,cN=...,c0=...,N=...`` (any subset, any order).

    Example:
        >>> parse_constants("b=1/2,N=3")
        {'b': Fraction(1, 2), 'N': 3}
    """
    overrides: dict[str, Fraction | int] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = item.partition("=")
        name = CONSTANT_NAMES.get(key.strip())
        if not sep or name is None:
            raise argparse.ArgumentTypeError(f"unknown constant assignment {item!r}")
        try:
            number = parse_rational(value.strip())
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from e
        if name == "N":
            if number.denominator != 1:
                raise argparse.ArgumentTypeError("N must be an integer")
            number = int(number)
        overrides[name] = number
    return overrides


def _rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from e
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


@contextmanager
def field_cache(path: str | None) -> Iterator[FieldCache | None]:
    """A loaded cache for the duration of a command, saved afterwards."""
    if not path:
        yield None
        return
    cache = FieldCache(path)
    cache.load()
    yield cache
    cache.save()


def _load(path: str, args: argparse.Namespace) -> Instance:
    instance = load_instance(path)
    if args.constants:
        instance = replace(instance, constants=replace(instance.constants, **args.constants))
    return instance


@track_errors()
def cmd_tau(args: argparse.Namespace) -> int:
    instance = _load(args.instance, args)
    with field_cache(args.cache) as cache:
        report = test_invariant(
            instance.datum,
            instance.level,
            instance.constants,
            require_upper=args.require_upper,
            cache=cache,
            precision_max=args.precision_max,
        )
    render(tau_report(instance, report), args.format, sys.stdout)
    return 0


@track_errors()
def cmd_bounds(args: argparse.Namespace) -> int:
    instance = _load(args.instance, args)
    with field_cache(args.cache) as cache:
        discriminant = splitting_discriminant(instance.datum.torus, cache=cache)
        bounds = bounds_report(
            instance.datum,
            instance.level,
            instance.constants,
            require_upper=args.require_upper,
            cache=cache,
            precision_max=args.precision_max,
        )
    render(bounds_report_out(instance, discriminant, bounds), args.format, sys.stdout)
    return 0


@track_errors()
def cmd_defects(args: argparse.Namespace) -> int:
    instance = _load(args.instance, args)
    defects = evaluate_primes(
        instance.datum, instance.level, instance.constants, args.precision_max
    )
    render(defects_report(instance, defects), args.format, sys.stdout)
    return 0


@track_errors()
def cmd_classify(args: argparse.Namespace) -> int:
    paths = load_list(args.list)
    instances = [_load(path, args) for path in paths]
    logger.info("Classifying %d instances from %s", len(instances), args.list)
    with field_cache(args.cache) as cache:
        result = classify_sequence(
            [(i.datum, i.level, i.constants) for i in instances],
            args.threshold,
            max_workers=args.workers,
            cache=cache,
            precision_max=args.precision_max,
        )
    report = classify_report([str(path) for path in paths], args.threshold, result)
    render(report, args.format, sys.stdout)
    return 0


@track_errors()
def cmd_intersect(args: argparse.Namespace) -> int:
    instances = [_load(path, args) for path in load_list(args.list)]
    if not instances:
        raise InstanceError(f"{args.list} names no instances")
    first = instances[0]
    minimized = [
        minimize_over_coset(i.datum.w, i.datum.w_prime_space, first.level).element
        for i in instances
    ]
    level = intersect_levels(first.level, minimized, first.datum.action)
    render(intersect_report(level), args.format, sys.stdout)
    return 0


@track_errors()
def cmd_oracle(args: argparse.Namespace) -> int:
    report = oracle_report(run_oracle_checks())
    render(report, args.format, sys.stdout)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    """The argument parser; environment defaults are read when it is built."""
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument(
        "--constants",
        type=parse_constants,
        default={},
        help="override instance constants, e.g. b=1/2,cN=1,c0=3,N=2",
    )
    shared.add_argument(
        "--precision-max",
        type=_positive_int,
        default=os.getenv("ORBIT_BOUNDS_PRECISION_MAX"),
        help="cap on the p-adic precision",
    )
    shared.add_argument("--format", choices=("table", "json"), default="table")
    shared.add_argument(
        "--cache",
        default=os.getenv("ORBIT_BOUNDS_CACHE"),
        help="field cache file (read and updated)",
    )

    parser = argparse.ArgumentParser(
        prog="orbit-bounds",
        description="Test invariants and orbit bounds for special subvarieties",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, handler, help_text in (
        ("tau", cmd_tau, "test invariant with defects and bounds"),
        ("bounds", cmd_bounds, "lower and upper orbit bounds"),
        ("defects", cmd_defects, "defect primes and per-prime indices"),
    ):
        command = commands.add_parser(name, parents=[shared], help=help_text)
        command.add_argument("instance", help="instance file (YAML)")
        if name != "defects":
            command.add_argument(
                "--require-upper",
                action="store_true",
                help="fail when the class number is unsupported",
            )
        command.set_defaults(handler=handler)

    classify = commands.add_parser(
        "classify", parents=[shared], help="boundedness verdict for a list"
    )
    classify.add_argument("list", help="list file, one instance path per line")
    classify.add_argument("--threshold", type=_rational_arg, required=True)
    classify.add_argument(
        "--workers",
        type=_positive_int,
        default=os.getenv("ORBIT_BOUNDS_WORKERS", DEFAULT_WORKERS),
    )
    classify.set_defaults(handler=cmd_classify)

    intersect = commands.add_parser(
        "intersect", parents=[shared], help="level fixing every listed w"
    )
    intersect.add_argument("list", help="list file, one instance path per line")
    intersect.set_defaults(handler=cmd_intersect)

    oracle = commands.add_parser(
        "oracle", parents=[shared], help="brute-force cross-checks"
    )
    oracle.set_defaults(handler=cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    setup_logging()
    initialize_rollbar()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    logger.info("Running %s", args.command)
    try:
        return args.handler(args)
    except Exception:
        return 1


if __name__ == "__main__":
    sys.exit(main())
