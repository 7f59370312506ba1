"""
Subcommand handlers. Each takes the parsed arguments and returns the exit code.

Library errors are turned into `file:line:col: severity: message` lines on
stderr and exit code 2 here; nothing below this module prints.
"""

import argparse
import functools
import json
import logging
import sys
import time
from pathlib import Path
from typing import Callable, List, Optional

import jsonschema

from annotator.emitter import annotate_source, emit_wrapper
from annotator.plan import AnnotationMode, UpdatePolicy, plan_annotations
from checker.oracle import brute_force_paths
from checker.verdicts import check, exit_code
from config import ANNOTATED_SUFFIX, EXIT_USAGE, SPIDEV_SPEC_PATH
from errors import DiagnosticsError, ThadcError
from frontend.pipeline import load_program
from model.thad import ThadSet
from reporting.corpus import relevance_matrix, run_corpus, summary_frame
from reporting.graph import dependency_graph, to_dot, to_text
from reporting.render import render_text, use_color
from reporting.report import build_report, oracle_summary, report_json, validate_report
from specio.loader import load_constants, load_thad_spec

logger = logging.getLogger(__name__)


def _report_error(exc: Exception) -> int:
    if isinstance(exc, DiagnosticsError):
        for diagnostic in exc.diagnostics:
            print(diagnostic.format(exc.filename), file=sys.stderr)
    elif isinstance(exc, jsonschema.ValidationError):
        print(f"error: report does not match its schema: {exc.message}", file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


def guarded(handler: Callable[[argparse.Namespace], int]) -> Callable[[argparse.Namespace], int]:
    """Map input errors raised by ``handler`` to exit code 2."""

    @functools.wraps(handler)
    def run(args: argparse.Namespace) -> int:
        try:
            return handler(args)
        except (FileNotFoundError, ThadcError, ValueError, jsonschema.ValidationError) as exc:
            return _report_error(exc)

    return run


def spec_paths(args: argparse.Namespace) -> List[Path]:
    return list(args.spec) if args.spec else [SPIDEV_SPEC_PATH]


def load_selected_set(args: argparse.Namespace) -> ThadSet:
    """THAD set named by --spec/--consts, restricted by --select."""
    constants = load_constants(args.consts)
    thad_set = load_thad_spec(spec_paths(args), constants)
    if args.select:
        ids = [part.strip() for part in args.select.split(",") if part.strip()]
        thad_set = thad_set.select(ids)
    return thad_set


def _write(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    with output.open("w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _run_corpus(args: argparse.Namespace) -> int:
    results = run_corpus(args.corpus, args.corpus_jobs, spec_paths(args), args.consts)
    matrix = relevance_matrix(results)
    summary = summary_frame(results)
    if args.no_timing and not summary.empty:
        summary = summary.drop(columns=["wall_time_ms"])

    if args.format == "json":
        payload = {
            "programs": summary.to_dict(orient="records"),
            "matrix": matrix.to_dict(),
            "mismatches": {r.fixture.name: r.mismatches for r in results},
        }
        sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    else:
        print(matrix.to_string())
        print()
        print(summary.to_string(index=False))
        for result in results:
            for problem in result.mismatches:
                print(f"[WARN] {result.fixture.name}: {problem}")
    if args.output is not None:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        matrix.to_csv(args.output)
    if args.plot is not None:
        from reporting.plots import plot_relevance_matrix

        plot_relevance_matrix(matrix, args.plot)
    return 0 if all(r.passed for r in results) else 1


@guarded
def run_check(args: argparse.Namespace) -> int:
    """
    `thadc check`: verdicts for one program, or the corpus harness.

    Returns:
        0 when every THAD is satisfied, 1 when one is violated, 3 when one
        is inconclusive and none violated, 2 on input errors.
    """
    if args.corpus is not None:
        return _run_corpus(args)
    if args.program is None:
        print("error: a program is required unless --corpus is given", file=sys.stderr)
        return EXIT_USAGE

    thad_set = load_selected_set(args)
    start = time.perf_counter()
    program = load_program(args.program, thad_set, args.entry, args.inline_depth)
    verdicts = check(program, thad_set, n_jobs=args.jobs)
    oracle = None
    if args.unroll is not None:
        if args.unroll < 0:
            raise ValueError("--unroll must not be negative")
        exact = brute_force_paths(program, thad_set, path_bound=args.unroll)
        oracle = oracle_summary(verdicts, exact, args.unroll)
        if not oracle["agrees"]:
            logger.warning("oracle disagrees on %s", ", ".join(oracle["disagreements"]))
    elapsed = None if args.no_timing else (time.perf_counter() - start) * 1000.0

    report = build_report(
        program, thad_set, verdicts, spec_paths(args), args.consts, elapsed, oracle
    )
    if args.format == "json":
        validate_report(report)
        _write(report_json(report), args.output)
    else:
        color = args.output is None and use_color(sys.stdout)
        _write(render_text(report, color), args.output)
    return exit_code(verdicts)


def annotated_path(source: Path) -> Path:
    """`hal.c` -> `hal.annotated.c`."""
    return source.with_name(source.stem + ANNOTATED_SUFFIX)


@guarded
def run_annotate(args: argparse.Namespace) -> int:
    """`thadc annotate`: annotate a HAL source, or emit a wrapper with --wrapper."""
    thad_set = load_selected_set(args)
    mode = AnnotationMode(args.mode)
    policy = UpdatePolicy(args.updates)
    if args.wrapper:
        _write(emit_wrapper(thad_set, mode, policy), args.output)
        return 0
    if args.hal_source is None:
        print("error: a HAL source is required unless --wrapper is given", file=sys.stderr)
        return EXIT_USAGE
    if not args.hal_source.exists():
        raise FileNotFoundError(f"HAL source not found: {args.hal_source}")

    with args.hal_source.open("r", encoding="utf-8", newline="") as handle:
        source = handle.read()
    annotated = annotate_source(plan_annotations(thad_set, policy), source, mode)
    output = args.output or annotated_path(args.hal_source)
    _write(annotated.text, output)
    print(f"[OK] {len(annotated.inserted)} lines inserted: {output}", file=sys.stderr)
    return 0


@guarded
def run_explain(args: argparse.Namespace) -> int:
    """`thadc explain`: the dependency graph as DOT or an adjacency listing."""
    graph = dependency_graph(load_selected_set(args))
    _write(to_dot(graph) if args.format == "dot" else to_text(graph), args.output)
    return 0
