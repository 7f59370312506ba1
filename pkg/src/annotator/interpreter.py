"""
Executes an annotation plan's ghost statements along a HAL event sequence.

Each event runs the asserts of its routine first (they sit at the top of
the body) and then the updates (they sit before the return). Descriptor
ghosts start undefined; an undefined ghost never equals a descriptor.
"""

from typing import Dict, Iterable, Optional, Set

from annotator.plan import AnnotationPlan
from model.thad import CallEvent


def interpret_plan(plan: AnnotationPlan, events: Iterable[CallEvent]) -> Set[str]:
    """
    Run the plan's ghost code along ``events``.

    Args:
        plan: Annotation plan.
        events: HAL call events of one execution, in order.

    Returns:
        Ids of the THADs whose assert failed at least once.
    """
    state: Dict[str, int] = {d.name: d.initializer or 0 for d in plan.ghost_decls}
    descriptors: Dict[str, Optional[str]] = {
        d.name: None for d in plan.ghost_decls if d.initializer is None
    }
    failed: Set[str] = set()

    for event in events:
        for check in plan.asserts_for(event.routine):
            if check.guard is not None and not check.guard.holds(event.discriminator_value):
                continue
            ok = state[check.state_var] == 1
            if check.fd_var is not None:
                held = descriptors[check.fd_var]
                ok = ok and event.descriptor_token is not None and held == event.descriptor_token
            if not ok:
                failed.add(check.thad_id)

        for update in plan.updates_for(event.routine):
            if update.guard is not None and not update.guard.holds(event.discriminator_value):
                continue
            state[update.state_var] = 1
            if update.fd_var is not None:
                descriptors[update.fd_var] = (
                    event.produced_token if update.fd_from_return else event.descriptor_token
                )
    return failed
