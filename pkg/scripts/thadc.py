#!/usr/bin/env python
"""
Run the thadc command line from a source checkout.

Usage:
    python scripts/thadc.py check corpus/io-expander.c --select d3,d4,d14,d26
    python scripts/thadc.py annotate corpus/hal/spidev-hal.c --select d1,d8,d15
    python scripts/thadc.py explain --format text
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from cli.main import main


if __name__ == "__main__":
    sys.exit(main())
