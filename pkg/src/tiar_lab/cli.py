"""Command line entry point: ``tiar-lab {run,sweep,check,enumerate-groups}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError, PreconditionError
from .harness import check_properties, enumerate_groups, load_config, run_experiment, run_sweep, write_enumeration

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PROPERTY_FAILURE = 2
EXIT_IO = 3

log = logging.getLogger("tiar_lab")


def _group_sizes(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tiar-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train and evaluate one configuration")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("sweep", help="run the cartesian product of the config's sweep axes")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("check", help="exhaustively verify advantage invariants")
    p.add_argument("--group-sizes", type=_group_sizes, default=[4, 8, 16])
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("enumerate-groups", help="write per-composition advantage statistics as CSV")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--out", required=True, type=Path)
    return parser


def _dispatch(args) -> int:
    if args.command == "run":
        result = run_experiment(load_config(args.config), args.out)
        log.info("wrote %s", result.run_dir)
        print(result.metrics.to_json(), end="")
    elif args.command == "sweep":
        if args.workers is not None and args.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        results, _ = run_sweep(load_config(args.config), args.out, args.workers)
        log.info("wrote %d runs and %s", len(results), args.out / "comparison.csv")
    elif args.command == "check":
        report = check_properties(args.group_sizes)
        report.write(args.out)
        for r in report.results:
            print(f"{'PASS' if r.passed else 'FAIL'}  G={r.G:<3d} {r.name} ({r.checked} checked)")
        if not report.passed:
            return EXIT_PROPERTY_FAILURE
    elif args.command == "enumerate-groups":
        if args.g < 2:
            raise ConfigError("g", "group size must be >= 2")
        if args.lam < 0:
            raise ConfigError("lambda", "must be >= 0")
        args.out.parent.mkdir(parents=True, exist_ok=True)
        write_enumeration(enumerate_groups(args.g, args.lam), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, PreconditionError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
