"""Command-line entry point: ``phononcool run | compare | selftest``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import sweep
from .selftest import run_selftest


def _cmd_run(args) -> int:
    config = sweep.load_config(args.config)
    changes = {}
    if args.modes:
        changes["modes"] = sweep.parse_modes(" ".join(args.modes))
    if args.points is not None:
        changes["sweep_points"] = args.points
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.format is not None:
        changes["format"] = args.format
    if args.output is not None:
        changes["output"] = args.output
    if changes:
        config = config.with_(**changes)
    result = sweep.run(config)
    if config.output is None:
        sys.stdout.write(sweep.dumps(result, config.format))
    failed = sum(r.failed for r in result.rows)
    logging.info("%d rows written, %d failed", len(result.rows), failed)
    return 0


def _cmd_compare(args) -> int:
    if args.nbar is not None:
        nbar = args.nbar
    elif args.config is not None:
        nbar = sweep.load_config(args.config).params.nbar
    else:
        print("compare needs --nbar or --config to know the bath occupation", file=sys.stderr)
        return 2
    report = sweep.compare_modes(sweep.load_result(args.input), nbar)
    sys.stdout.write(report.format())
    return 0


def _cmd_selftest(args) -> int:
    ok = True
    for name, passed, detail in run_selftest(args.seed):
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        ok &= passed
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phononcool", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a parameter sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.add_argument("--format", choices=sweep.FORMATS)
    p.add_argument("--modes", nargs="+", help=f"subset of {', '.join(sweep.MODES)}")
    p.add_argument("--points", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("compare", help="compare secular and beyond-secular columns of a result file")
    p.add_argument("--input", required=True)
    p.add_argument("--nbar", type=float)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("selftest", help="oracle-equivalence and thermal fixed-point checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (sweep.ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
