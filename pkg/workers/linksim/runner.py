"""
linksim runner — command-line entry point.

Subcommands:
  simulate     FER/BER sweep over the configured Eb/N0 grid → fer.csv
  exit         MI trajectory per turbo iteration → exit.csv, exit_decoder.csv
  complexity   per-symbol operation counts → complexity.csv
  selftest     in-process property checks

Exit status: 0 success, 1 usage or configuration error, 2 I/O error,
3 enumeration budget exceeded.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from linksim.core.simulate import (
    complexity_report,
    complexity_table,
    exit_trajectory,
    run_sweep,
    summarize,
)
from linksim.errors import CapabilityError, InvalidArgumentError
from linksim.io.loader import load_config
from linksim.io.schema import LinkConfig, RunManifest
from linksim.io.writer import write_complexity_csv, write_manifest
from linksim.policy.kinds import ExitStatus
from linksim.policy.profile import ComplexityPreset
from linksim.selftest import run_selftest
from linksim.settings import settings

logger = logging.getLogger(__name__)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2."""

    def error(self, message: str) -> None:
        raise _UsageError(f"{self.prog}: {message}")


# ── Subcommands ──────────────────────────────────────────────────────────────

def _config(args: argparse.Namespace) -> LinkConfig:
    overrides = {
        "seed": args.seed,
        "output": str(args.out) if args.out is not None else None,
    }
    return load_config(args.config, overrides)


def _output_dir(args: argparse.Namespace, config: Optional[LinkConfig] = None) -> Path:
    if args.out is not None:
        return Path(args.out)
    if config is not None and config.output:
        return Path(config.output)
    return Path(settings.output_dir)


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _config(args)
    out = _output_dir(args, config)
    records = run_sweep(config, threads=args.threads, output_dir=out, progress=not args.quiet)
    print(summarize(records))
    write_manifest(
        RunManifest(command="simulate", config=config, threads=args.threads or settings.threads,
                    outputs=["fer.csv"]),
        out,
    )
    print(f"Outputs written to: {out}")
    return ExitStatus.OK


def _cmd_exit(args: argparse.Namespace) -> int:
    config = _config(args)
    out = _output_dir(args, config)
    report = exit_trajectory(
        config, ebn0_db=args.ebn0, frames=args.frames, threads=args.threads, output_dir=out,
    )
    print(f"EXIT at Eb/N0={report.ebn0_db:g} dB over {report.frames} frames")
    for p in report.trajectory:
        print(f"  ti={p.ti} IA_det={p.ia_det:.4f} IE_det={p.ie_det:.4f} "
              f"IA_dec={p.ia_dec:.4f} IE_dec={p.ie_dec:.4f}")
    write_manifest(
        RunManifest(command="exit", config=config, threads=args.threads or settings.threads,
                    outputs=["exit.csv", "exit_decoder.csv"]),
        out,
    )
    return ExitStatus.OK


def _cmd_complexity(args: argparse.Namespace) -> int:
    if args.preset is not None:
        config = None
        rows = complexity_table(ComplexityPreset.by_name(args.preset), measure=not args.analytic_only)
    else:
        config = _config(args)
        rows = [complexity_report(config, measure=not args.analytic_only)]

    mismatches = 0
    for r in rows:
        ok = r.matches_expected
        mismatches += not ok
        measured = (
            f"{r.measured.additions:g}/{r.measured.multiplications:g}"
            if r.measured is not None else "-"
        )
        expected = (
            f" expected={r.expected_additions}/{r.expected_multiplications}"
            if r.expected_additions is not None else ""
        )
        print(f"{r.scheme} {r.detector} Q={r.q} J={r.order} Ns={r.n_s}: "
              f"analytic={r.analytic.additions:g}/{r.analytic.multiplications:g} "
              f"measured={measured}{expected}{'' if ok else '  MISMATCH'}")

    if args.out is not None or (config is not None and config.output):
        out = _output_dir(args, config)
        write_complexity_csv(rows, out / "complexity.csv")
        print(f"Outputs written to: {out}")
    if mismatches:
        logger.error("%d complexity row(s) differ from the expected values", mismatches)
        return ExitStatus.USAGE
    return ExitStatus.OK


def _cmd_selftest(args: argparse.Namespace) -> int:
    results = run_selftest(seed=args.seed or 0)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return ExitStatus.OK if not failed else ExitStatus.USAGE


# ── CLI ──────────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="key = value experiment file")
    common.add_argument("--seed", type=int, default=None, help="Master seed override")
    common.add_argument("--threads", type=int, default=None, help="Worker threads")
    common.add_argument("--out", type=Path, default=None, help="Output directory")
    common.add_argument("-q", "--quiet", action="store_true", help="Disable progress bars")
    common.add_argument("-v", "--verbose", action="store_true", help="Enable verbose logging")

    parser = _Parser(
        prog="linksim",
        description="linksim — precoded single-carrier turbo link simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p_sim = sub.add_parser("simulate", parents=[common], help="FER/BER sweep")
    p_sim.set_defaults(func=_cmd_simulate)

    p_exit = sub.add_parser("exit", parents=[common], help="EXIT trajectory")
    p_exit.add_argument("--ebn0", type=float, default=None,
                        help="Eb/N0 in dB (default: lowest grid point with FER < 0.5)")
    p_exit.add_argument("--frames", type=int, default=100, help="Frames to average")
    p_exit.set_defaults(func=_cmd_exit)

    p_cx = sub.add_parser("complexity", parents=[common], help="Operation counts")
    p_cx.add_argument("--preset", default=None, help="Reference preset (table4)")
    p_cx.add_argument("--analytic-only", action="store_true",
                      help="Skip the instrumented measurement")
    p_cx.set_defaults(func=_cmd_complexity)

    p_st = sub.add_parser("selftest", parents=[common], help="Property checks")
    p_st.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point for linksim; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(e, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return ExitStatus.USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return int(args.func(args))
    except CapabilityError as e:
        print(f"linksim: {e}", file=sys.stderr)
        return ExitStatus.CAPABILITY
    except (InvalidArgumentError, ValueError) as e:
        print(f"linksim: {e}", file=sys.stderr)
        return ExitStatus.USAGE
    except OSError as e:
        print(f"linksim: {e}", file=sys.stderr)
        return ExitStatus.IO


if __name__ == "__main__":
    sys.exit(main())
