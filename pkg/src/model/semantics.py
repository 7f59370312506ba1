"""
Reference trace semantics of THADs.

A trace is a finite sequence of CallEvents. A THAD holds on a trace when
every event matching its dependent pattern is preceded by an event matching
its dependency pattern (and, for bound THADs, the preceding event handed
over the same descriptor token). These functions are the oracle the
checker, the annotator and the brute-force path enumerator are tested
against.
"""

from typing import Dict, Iterable, Optional, Sequence, Set

from model.thad import Alias, BindingSource, CallEvent, RoutinePattern, Thad, ThadSet


def _satisfies_constant(value: Optional[str], constant: str, aliases: Iterable[Alias]) -> bool:
    if value is None:
        return False
    if value == constant:
        return True
    return any(a.constant == value and a.target == constant for a in aliases)


def match_event(pattern: RoutinePattern, ev: CallEvent, aliases: Iterable[Alias] = ()) -> bool:
    """
    Decide whether a call event matches a routine pattern.

    Args:
        pattern: Routine name plus optional discriminator constraint.
        ev: Call event.
        aliases: Aliases letting one constant stand in for another.

    Returns:
        True iff the names agree and the constraint (if any) is met.
    """
    if pattern.routine != ev.routine:
        return False
    if pattern.constraint is None:
        return True
    return _satisfies_constant(ev.discriminator_value, pattern.constraint.constant, aliases)


def matched_via_alias(pattern: RoutinePattern, ev: CallEvent, aliases: Iterable[Alias]) -> bool:
    """True when ``ev`` matches ``pattern`` only because of an alias."""
    return match_event(pattern, ev, aliases) and not match_event(pattern, ev)


def flowing_token(thad: Thad, ev: CallEvent) -> Optional[str]:
    """Descriptor token a dependency event hands to later dependent calls."""
    if thad.binding is None:
        return None
    if thad.binding.source is BindingSource.RETURN:
        return ev.produced_token
    return ev.descriptor_token


def first_violation(
    thad: Thad, trace: Sequence[CallEvent], aliases: Iterable[Alias] = ()
) -> Optional[int]:
    """
    Index of the first dependent event lacking a preceding dependency, if any.

    Args:
        thad: Dependency to evaluate.
        trace: Sequence of call events.
        aliases: Constant aliases of the enclosing set.

    Returns:
        Offending index, or None when the trace satisfies the THAD.
    """
    aliases = tuple(aliases)
    completed = False
    tokens: Set[str] = set()

    for index, ev in enumerate(trace):
        if match_event(thad.dependent, ev, aliases):
            if thad.binding is None:
                ok = completed
            else:
                ok = ev.descriptor_token is not None and ev.descriptor_token in tokens
            if not ok:
                return index
        if match_event(thad.dependency, ev, aliases):
            if thad.binding is None:
                completed = True
            else:
                token = flowing_token(thad, ev)
                if token is not None:
                    tokens.add(token)
    return None


def trace_satisfies(thad: Thad, trace: Sequence[CallEvent], aliases: Iterable[Alias] = ()) -> bool:
    """True iff every dependent call in ``trace`` has a preceding dependency call."""
    return first_violation(thad, trace, aliases) is None


def trace_satisfies_all(thad_set: ThadSet, trace: Sequence[CallEvent]) -> Dict[str, bool]:
    """Pointwise trace_satisfies for every THAD of the set, keyed by id."""
    return {
        thad.id: trace_satisfies(thad, trace, thad_set.aliases) for thad in thad_set.sorted_thads()
    }
