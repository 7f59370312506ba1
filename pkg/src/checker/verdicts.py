"""
Per-THAD verdicts.

A THAD is Violated when some reachable dependent call definitely matches
and its key is not completed on every path, Inconclusive when a call that
might match cannot be decided (unknown discriminator or descriptor), and
Satisfied otherwise. THADs whose dependent routine is never called are
trivially satisfied.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from joblib import Parallel, delayed

from checker.dataflow import thad_fixpoint
from checker.monitor import STAR, Keys
from checker.witness import WitnessTrace, find_witness
from config import EXIT_INCONCLUSIVE, EXIT_SATISFIED, EXIT_VIOLATED
from frontend.pipeline import AnalyzedProgram
from model.semantics import match_event, matched_via_alias
from model.thad import Alias, Thad, ThadSet

logger = logging.getLogger(__name__)


class VerdictStatus(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ThadVerdict:
    thad_id: str
    status: VerdictStatus
    witness: Optional[WitnessTrace] = None
    reason: Optional[str] = None
    trivially_satisfied: bool = False
    via_alias: bool = False

    def __post_init__(self) -> None:
        if (self.witness is not None) != (self.status is VerdictStatus.VIOLATED):
            raise ValueError("a witness accompanies exactly the violated verdicts")


def _position(program: AnalyzedProgram, node_id: int) -> Tuple[int, int, int]:
    node = program.model.entry_cfg.node(node_id)
    return node.line, node.column, node_id


def check_thad(
    program: AnalyzedProgram, thad: Thad, aliases: Tuple[Alias, ...] = ()
) -> ThadVerdict:
    """
    Decide one THAD.

    Args:
        program: Analyzed program.
        thad: THAD to decide.
        aliases: Constant aliases of the enclosing set.

    Returns:
        ThadVerdict with a witness when violated.
    """
    cfg = program.model.entry_cfg
    states = thad_fixpoint(program, thad, aliases)
    violations: List[int] = []
    undecided: List[Tuple[int, str]] = []
    relevant = False
    via_alias = False

    for node_id in sorted(program.flow.events, key=lambda n: _position(program, n)):
        if node_id not in states:
            continue
        event = program.flow.events[node_id]
        node = cfg.node(node_id)
        via_alias = via_alias or any(
            matched_via_alias(pattern, event, aliases) for pattern in (thad.dependent, thad.dependency)
        )
        definite = match_event(thad.dependent, event, aliases)
        possible = definite or (
            thad.dependent.routine == event.routine
            and thad.dependent.constraint is not None
            and node.discriminator_unknown
        )
        if not possible:
            continue
        relevant = True
        completed: Keys = states[node_id]
        key = STAR if thad.binding is None else event.descriptor_token
        if key is not None and key in completed:
            continue
        location = f"{program.model.filename}:{node.line}"
        if not definite:
            undecided.append((node_id, f"unresolved discriminator of {event.routine} at {location}"))
        elif key is None:
            undecided.append((node_id, f"unresolved descriptor of {event.routine} at {location}"))
        else:
            violations.append(node_id)

    if violations:
        witness = find_witness(program, thad, violations[0], aliases)
        logger.debug("%s violated at node %d", thad.id, violations[0])
        return ThadVerdict(thad.id, VerdictStatus.VIOLATED, witness=witness, via_alias=via_alias)
    if undecided:
        return ThadVerdict(
            thad.id, VerdictStatus.INCONCLUSIVE, reason=undecided[0][1], via_alias=via_alias
        )
    return ThadVerdict(
        thad.id, VerdictStatus.SATISFIED, trivially_satisfied=not relevant, via_alias=via_alias
    )


def check(program: AnalyzedProgram, thad_set: ThadSet, n_jobs: int = 1) -> List[ThadVerdict]:
    """
    Decide every THAD of the set.

    Args:
        program: Analyzed program.
        thad_set: THADs to check.
        n_jobs: Number of threads; the THADs are independent.

    Returns:
        Verdicts in natural THAD id order.
    """
    thads = thad_set.sorted_thads()
    if n_jobs == 1 or len(thads) < 2:
        return [check_thad(program, thad, thad_set.aliases) for thad in thads]
    return list(
        Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(check_thad)(program, thad, thad_set.aliases) for thad in thads
        )
    )


def exit_status(verdicts: List[ThadVerdict]) -> Optional[VerdictStatus]:
    """Worst status among verdicts (violated before inconclusive); None if all satisfied."""
    statuses = {v.status for v in verdicts}
    for status in (VerdictStatus.VIOLATED, VerdictStatus.INCONCLUSIVE):
        if status in statuses:
            return status
    return None


def exit_code(verdicts: List[ThadVerdict]) -> int:
    """Process exit code for a list of verdicts."""
    worst = exit_status(verdicts)
    if worst is VerdictStatus.VIOLATED:
        return EXIT_VIOLATED
    if worst is VerdictStatus.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_SATISFIED
