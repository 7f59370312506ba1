"""
Configuration for thadc, the THAD checker.
"""

from pathlib import Path
from typing import Dict, Tuple

PROJECT_ROOT = Path(__file__).parent.parent
SPECS_DIR = PROJECT_ROOT / "specs"
CORPUS_DIR = PROJECT_ROOT / "corpus"
CORPUS_EXPECTED_DIR = CORPUS_DIR / "expected"
CORPUS_HAL_DIR = CORPUS_DIR / "hal"
OUTPUTS_DIR = PROJECT_ROOT / "outputs"
REPORTS_DIR = OUTPUTS_DIR / "reports"
FIGURES_DIR = OUTPUTS_DIR / "figures"

SPIDEV_SPEC_PATH = SPECS_DIR / "spidev.thad"
SPIDEV_CONSTS_PATH = SPECS_DIR / "spidev-linux.consts"
SPIDEV_FD_OVERLAY_PATH = SPECS_DIR / "spidev-fd.thad"
SPIDEV_LEGACY_MODE_OVERLAY_PATH = SPECS_DIR / "spidev-legacy-mode.thad"
REPORT_SCHEMA_PATH = SPECS_DIR / "report.schema.json"

TOOL_NAME = "thadc"
TOOL_VERSION = "0.1.0"

RANDOM_STATE = 42

# Exit codes of `thadc check`
EXIT_SATISFIED = 0
EXIT_VIOLATED = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3

DEFAULT_ENTRY = "main"
DEFAULT_INLINE_DEPTH = 16
PATH_CAP = 1_000_000
CORPUS_N_JOBS = 4

COLOR_ENV_VAR = "THADC_COLOR"
COLOR_CHOICES = ("auto", "never", "always")
STATUS_COLORS: Dict[str, str] = {
    "satisfied": "\033[32m",
    "violated": "\033[31m",
    "inconclusive": "\033[33m",
}
COLOR_RESET = "\033[0m"

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

# Header macro prefixes stripped when an identifier is matched against the
# constants table by name (the tables omit SPI_IOC_).
CONSTANT_PREFIXES: Tuple[str, ...] = ("SPI_IOC_",)

# Calls that never return; the CFG routes them to the function exit.
NORETURN_FUNCTIONS = frozenset({"exit", "_exit", "abort", "__assert_fail"})

# Typedefs the MiniC frontend prepends so pycparser accepts common
# fixed-width types without real headers.
MINIC_PRELUDE = "\n".join(
    [
        "typedef int size_t;",
        "typedef int ssize_t;",
        "typedef int uint8_t;",
        "typedef int uint16_t;",
        "typedef int uint32_t;",
        "typedef int uint64_t;",
        "typedef int int8_t;",
        "typedef int int16_t;",
        "typedef int int32_t;",
        "typedef int int64_t;",
        "typedef int bool;",
        "typedef int mode_t;",
    ]
)

ANNOTATED_SUFFIX = ".annotated.c"

# Property campaign sizes
LOOP_FREE_PROGRAMS = 500
ONE_LOOP_PROGRAMS = 100
RANDOM_THAD_SETS = 100
MAX_HAL_CALLS = 12
MAX_BRANCHES = 4
# one-loop programs stay small enough for 3-fold path enumeration
LOOP_BRANCHES = 2
UNROLL_FACTORS = (1, 2, 3)

# Relevance-matrix heatmap
PLOT_STYLE = "whitegrid"
FIGURE_SIZE = (8, 10)
FONT_SIZE = 10
MATRIX_MARKS: Dict[str, float] = {
    "": 0.0,
    "(•)": 0.5,
    "•": 1.0,
    "?": -0.5,
    "×": -1.0,
}
