"""
File loading for THAD specifications and constants tables.
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

from config import SPIDEV_CONSTS_PATH, SPIDEV_SPEC_PATH
from errors import SpecParseError
from model.thad import ThadSet
from specio.parser import parse_constants, parse_thad_spec

logger = logging.getLogger(__name__)


def _read(path: Path) -> str:
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    return path.read_text(encoding="utf-8")


def load_constants(path: Path) -> Dict[str, int]:
    """
    Load a `.consts` file.

    Args:
        path: Path to the constants table.

    Returns:
        Mapping from constant name to integer value.

    Raises:
        FileNotFoundError: If the file does not exist.
        SpecParseError: If the table is invalid.
    """
    document = parse_constants(_read(path))
    for diagnostic in document.diagnostics:
        if not diagnostic.is_error:
            logger.warning(diagnostic.format(str(path)))
    if document.parsed is None:
        raise SpecParseError(str(path), document.diagnostics)
    return document.parsed


def load_thad_spec(paths: Sequence[Path], constants: Dict[str, int]) -> ThadSet:
    """
    Load a THAD specification, applying later files as overlays.

    Args:
        paths: Base `.thad` file followed by optional overlays.
        constants: Constants table for constraint validation.

    Returns:
        Merged ThadSet.

    Raises:
        FileNotFoundError: If a file does not exist.
        SpecParseError: If a file is invalid.
    """
    thad_set: Optional[ThadSet] = None
    for path in paths:
        document = parse_thad_spec(_read(path), constants, base=thad_set)
        for diagnostic in document.diagnostics:
            if not diagnostic.is_error:
                logger.warning(diagnostic.format(str(path)))
        if document.parsed is None:
            raise SpecParseError(str(path), document.diagnostics)
        thad_set = document.parsed
    if thad_set is None:
        return ThadSet(constants=dict(constants))
    logger.debug("loaded %d routines and %d THADs", len(thad_set.routines), len(thad_set.thads))
    return thad_set


def bundled_spidev(overlays: Iterable[Path] = ()) -> ThadSet:
    """The bundled spidev THAD set with the Linux constants table."""
    constants = load_constants(SPIDEV_CONSTS_PATH)
    return load_thad_spec([SPIDEV_SPEC_PATH, *overlays], constants)
