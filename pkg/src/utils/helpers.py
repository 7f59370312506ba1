"""
General helper utilities.
"""

import re
from typing import Iterable, List, Tuple, Union

_ID_CHUNKS = re.compile(r"(\d+)")


def natural_key(identifier: str) -> Tuple[Union[int, str], ...]:
    """
    Sort key that orders embedded numbers numerically (d2 before d10).

    Args:
        identifier: Identifier such as a THAD id.

    Returns:
        Tuple usable as a sort key.
    """
    parts = _ID_CHUNKS.split(identifier)
    return tuple(int(part) if part.isdigit() else part for part in parts)


def sorted_ids(values: Iterable[str]) -> List[str]:
    """
    Return unique identifiers in natural order.

    Args:
        values: Iterable of identifiers.

    Returns:
        Naturally sorted list of unique identifiers.
    """
    return sorted(set(values), key=natural_key)


def is_c_identifier(name: str) -> bool:
    return re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) is not None
