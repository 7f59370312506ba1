"""
The frontend pipeline: parse, inline, resolve discriminators, track tokens.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

from config import DEFAULT_ENTRY, DEFAULT_INLINE_DEPTH
from frontend.cfg import ProgramModel
from frontend.discriminators import resolve_discriminators
from frontend.inliner import inline_calls
from frontend.minic import parse_program
from frontend.tokens import TokenFlow, build_token_flow
from model.thad import ThadSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalyzedProgram:
    """An inlined, resolved model of the entry function and its token flow."""

    model: ProgramModel
    flow: TokenFlow


def analyze_source(
    source: str,
    thad_set: ThadSet,
    filename: str = "<input>",
    entry: str = DEFAULT_ENTRY,
    inline_depth: int = DEFAULT_INLINE_DEPTH,
) -> AnalyzedProgram:
    """
    Run the whole frontend on a source text.

    Inlining happens before discriminator resolution so constants passed
    through helper parameters reach the HAL call sites.

    Raises:
        ProgramParseError: If the source is not valid MiniC.
        RecursionDetected: If user functions are recursive.
        DepthLimitExceeded: If inlining goes deeper than ``inline_depth``.
    """
    model = parse_program(source, filename, entry)
    inlined = inline_calls(model, inline_depth, thad_set.routine_names)
    resolved = resolve_discriminators(inlined, thad_set.constants, thad_set.routines)
    flow = build_token_flow(resolved)
    logger.debug(
        "%s: %d HAL call sites in %s", filename, len(flow.events), resolved.entry
    )
    return AnalyzedProgram(resolved, flow)


def load_program(
    path: Path,
    thad_set: ThadSet,
    entry: str = DEFAULT_ENTRY,
    inline_depth: int = DEFAULT_INLINE_DEPTH,
) -> AnalyzedProgram:
    """
    Read and analyze a MiniC file.

    Args:
        path: Path to the `.c` file.
        thad_set: THAD set providing routines and constants.
        entry: Entry function name.
        inline_depth: Inlining depth limit.

    Returns:
        AnalyzedProgram for the file.

    Raises:
        FileNotFoundError: If the file does not exist.
    """
    if not path.exists():
        raise FileNotFoundError(f"Program not found: {path}")
    source = path.read_text(encoding="utf-8")
    return analyze_source(source, thad_set, str(path), entry, inline_depth)
