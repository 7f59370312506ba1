"""
Command-line entry point: `thadc check|annotate|explain`.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from annotator.plan import AnnotationMode, UpdatePolicy
from cli.commands import run_annotate, run_check, run_explain
from config import (
    CORPUS_DIR,
    CORPUS_N_JOBS,
    DEFAULT_ENTRY,
    DEFAULT_INLINE_DEPTH,
    LOG_FORMAT,
    SPIDEV_CONSTS_PATH,
    TOOL_NAME,
    TOOL_VERSION,
)


def _add_spec_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--spec",
        action="append",
        type=Path,
        help="THAD spec file; repeat to add overlays (default: bundled spidev spec)",
    )
    parser.add_argument(
        "--consts",
        type=Path,
        default=SPIDEV_CONSTS_PATH,
        help="Constants table (default: bundled Linux spidev constants)",
    )
    parser.add_argument("--select", help="Comma-separated THAD ids to keep, e.g. d3,d4")
    parser.add_argument("-o", "--output", type=Path, help="Output path")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for every subcommand."""
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME, description="Check temporal HAL-API dependencies in C programs"
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {TOOL_VERSION}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    check = subparsers.add_parser("check", help="Check a program against a THAD spec")
    check.add_argument("program", nargs="?", type=Path, help="MiniC source file")
    _add_spec_options(check)
    check.add_argument("--format", choices=("text", "json"), default="text")
    check.add_argument("--entry", default=DEFAULT_ENTRY, help="Entry function")
    check.add_argument("--inline-depth", type=int, default=DEFAULT_INLINE_DEPTH)
    check.add_argument(
        "--unroll",
        type=int,
        metavar="K",
        help="Also run the brute-force path oracle with loops unrolled K times",
    )
    check.add_argument("--no-timing", action="store_true", help="Omit wall_time_ms")
    check.add_argument("--jobs", type=int, default=1, help="Threads for checking THADs")
    check.add_argument(
        "--corpus",
        nargs="?",
        const=CORPUS_DIR,
        type=Path,
        metavar="DIR",
        help="Check every corpus fixture instead of one program",
    )
    check.add_argument("--corpus-jobs", type=int, default=CORPUS_N_JOBS)
    check.add_argument("--plot", type=Path, help="Write the relevance-matrix heatmap (corpus)")
    check.set_defaults(handler=run_check)

    annotate = subparsers.add_parser("annotate", help="Insert ghost code for a THAD spec")
    annotate.add_argument("hal_source", nargs="?", type=Path, help="HAL implementation")
    _add_spec_options(annotate)
    annotate.add_argument(
        "--mode", choices=[m.value for m in AnnotationMode], default=AnnotationMode.ACSL.value
    )
    annotate.add_argument(
        "--updates", choices=[p.value for p in UpdatePolicy], default=UpdatePolicy.GUARDED.value
    )
    annotate.add_argument(
        "--wrapper", action="store_true", help="Emit a standalone wrapper instead"
    )
    annotate.set_defaults(handler=run_annotate)

    explain = subparsers.add_parser("explain", help="Print the THAD dependency graph")
    _add_spec_options(explain)
    explain.add_argument("--format", choices=("text", "dot"), default="dot")
    explain.set_defaults(handler=run_explain)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
