"""
Monitor states: the static shadow of the `state_<id>` ghost flags.

For every THAD the analysis tracks the set of keys whose dependency has
completed on all paths: the single key STAR for THADs without a binding,
or one descriptor token per completed dependency call for bound THADs.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, Mapping, Optional

from model.semantics import flowing_token, match_event
from model.thad import Alias, CallEvent, Thad

STAR = "*"

Keys = FrozenSet[str]


class Completion(str, Enum):
    UNREACHABLE = "unreachable"
    COMPLETED = "completed"
    NOT_COMPLETED = "not-completed"


@dataclass(frozen=True)
class MonitorState:
    """Completed keys per THAD id at one program point."""

    completed: Mapping[str, Keys] = field(default_factory=dict)

    def status(self, thad_id: str, key: str = STAR) -> Completion:
        keys = self.completed.get(thad_id)
        if keys is None:
            return Completion.UNREACHABLE
        return Completion.COMPLETED if key in keys else Completion.NOT_COMPLETED


def meet(left: Keys, right: Keys) -> Keys:
    """Must-meet: a key survives a join only when completed on both sides."""
    return left & right


def completed_key(thad: Thad, event: CallEvent, aliases: Iterable[Alias] = ()) -> Optional[str]:
    """
    Key a call event completes for ``thad``, if any.

    Args:
        thad: The dependency.
        event: Call event with tokens filled in.
        aliases: Constant aliases of the set.

    Returns:
        STAR for unbound THADs, the flowing token for bound ones, or None
        when the event does not complete the dependency.
    """
    if not match_event(thad.dependency, event, aliases):
        return None
    if thad.binding is None:
        return STAR
    return flowing_token(thad, event)
