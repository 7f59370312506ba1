#!/usr/bin/env python
"""
Run the seeded property campaigns: oracle equivalence, loop soundness and
annotation correctness over random programs.

Usage:
    python scripts/run_property_campaign.py --seed 42 --output-dir outputs/reports
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from config import (
    LOOP_FREE_PROGRAMS,
    ONE_LOOP_PROGRAMS,
    RANDOM_STATE,
    REPORTS_DIR,
    SPIDEV_CONSTS_PATH,
)
from generators.campaign import run_campaigns
from specio.loader import load_constants

# column that must be all True for each campaign
PASS_COLUMNS = {"oracle": "agrees", "loops": "sound", "annotation": "agrees"}


def parse_args() -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description="Run thadc property campaigns")
    parser.add_argument("--seed", type=int, default=RANDOM_STATE, help="Generator seed")
    parser.add_argument("--loop-free", type=int, default=LOOP_FREE_PROGRAMS)
    parser.add_argument("--one-loop", type=int, default=ONE_LOOP_PROGRAMS)
    parser.add_argument("--output-dir", default=str(REPORTS_DIR), help="Directory for CSV results")
    return parser.parse_args()


def main() -> int:
    """Run the campaigns and save one CSV per campaign."""
    args = parse_args()
    output_dir = Path(args.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    frames = run_campaigns(load_constants(SPIDEV_CONSTS_PATH), args.seed, args.loop_free, args.one_loop)
    elapsed = time.perf_counter() - start

    failed = False
    for name, frame in frames.items():
        path = output_dir / f"campaign_{name}.csv"
        frame.to_csv(path, index=False)
        bad = frame[~frame[PASS_COLUMNS[name]]]
        if bad.empty:
            print(f"[OK] {name}: {len(frame)} programs pass ({path})")
        else:
            failed = True
            print(f"[WARN] {name}: {len(bad)} of {len(frame)} programs fail ({path})")
    print(f"[OK] Campaigns finished in {elapsed:.1f} s")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
