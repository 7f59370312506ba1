#!/usr/bin/env python
"""
Check every corpus program against its fixture and write the relevance matrix.

Usage:
    python scripts/run_corpus.py --corpus corpus --output outputs/reports/relevance_matrix.csv
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from config import CORPUS_DIR, CORPUS_N_JOBS, FIGURES_DIR, REPORTS_DIR, SPIDEV_SPEC_PATH
from reporting.corpus import relevance_matrix, run_corpus, summary_frame
from reporting.plots import plot_relevance_matrix


def parse_args() -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description="Run the thadc corpus harness")
    parser.add_argument("--corpus", default=str(CORPUS_DIR), help="Corpus directory")
    parser.add_argument(
        "--output",
        default=str(REPORTS_DIR / "relevance_matrix.csv"),
        help="Path to the relevance matrix CSV",
    )
    parser.add_argument(
        "--plot",
        default=str(FIGURES_DIR / "relevance_matrix.png"),
        help="Path to the relevance matrix heatmap",
    )
    parser.add_argument("--jobs", type=int, default=CORPUS_N_JOBS, help="Concurrent programs")
    parser.add_argument(
        "--spec",
        action="append",
        help="THAD spec; repeat to add overlays applied to every fixture",
    )
    return parser.parse_args()


def main() -> int:
    """Check the corpus and save the matrix, the summary and the heatmap."""
    args = parse_args()
    output_path = Path(args.output)

    spec_paths = [Path(p) for p in args.spec] if args.spec else [SPIDEV_SPEC_PATH]
    results = run_corpus(Path(args.corpus), args.jobs, spec_paths)
    matrix = relevance_matrix(results)
    summary = summary_frame(results)

    output_path.parent.mkdir(parents=True, exist_ok=True)
    matrix.to_csv(output_path)
    summary_path = output_path.with_name("corpus_summary.csv")
    summary.to_csv(summary_path, index=False)
    plot_relevance_matrix(matrix, Path(args.plot))

    print(matrix.to_string())
    for result in results:
        if result.passed:
            print(f"[OK] {result.fixture.name}: exit {result.exit_code}")
        for problem in result.mismatches:
            print(f"[WARN] {result.fixture.name}: {problem}")
    print(f"[OK] Relevance matrix saved to: {output_path}")
    print(f"[OK] Summary saved to: {summary_path}")
    print(f"[OK] Heatmap saved to: {args.plot}")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
