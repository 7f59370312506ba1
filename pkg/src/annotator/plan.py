"""
Annotation plans: ghost declarations, updates and asserts per THAD.

Updates attach to the dependency routine and run just before it returns;
asserts attach to the dependent routine and run first in its body. A
discriminator constraint becomes a guard `<param> == CONST` (alias
constants join the guard as alternatives).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Set, Tuple

from model.thad import Alias, BindingSource, RoutinePattern, RoutineSpec, ThadSet


class UpdatePolicy(str, Enum):
    GUARDED = "guarded"
    AS_PRINTED = "as-printed"


class AnnotationMode(str, Enum):
    ACSL = "acsl"
    ASSERT = "assert"


@dataclass(frozen=True)
class Guard:
    """`param == c1 || param == c2 ...` over the discriminator parameter."""

    param: str
    constants: Tuple[str, ...]

    def holds(self, value: Optional[str]) -> bool:
        return value is not None and value in self.constants


@dataclass(frozen=True)
class GhostDecl:
    name: str
    thad_id: str
    initializer: Optional[int] = 0


@dataclass(frozen=True)
class GhostUpdate:
    """`state_<id> = 1;` plus `fd_<id> = <source>;` for bound THADs."""

    thad_id: str
    routine: str
    guard: Optional[Guard]
    state_var: str
    fd_var: Optional[str] = None
    fd_source: Optional[str] = None

    @property
    def fd_from_return(self) -> bool:
        return self.fd_var is not None and self.fd_source is None


@dataclass(frozen=True)
class GhostAssert:
    """`assert (state_<id> == 1 && <fd_param> == fd_<id>);` under an optional guard."""

    thad_id: str
    routine: str
    guard: Optional[Guard]
    state_var: str
    fd_var: Optional[str] = None
    fd_param: Optional[str] = None


@dataclass(frozen=True)
class AnnotationPlan:
    ghost_decls: Tuple[GhostDecl, ...] = ()
    updates: Tuple[GhostUpdate, ...] = ()
    asserts: Tuple[GhostAssert, ...] = ()
    constants: Dict[str, int] = field(default_factory=dict)
    policy: UpdatePolicy = UpdatePolicy.GUARDED
    routine_specs: Tuple[RoutineSpec, ...] = ()

    @property
    def routines(self) -> Tuple[str, ...]:
        """Routines the plan touches, in first-use order."""
        seen: List[str] = []
        for item in list(self.updates) + list(self.asserts):
            if item.routine not in seen:
                seen.append(item.routine)
        return tuple(seen)

    def routine_spec(self, name: str) -> Optional[RoutineSpec]:
        for spec in self.routine_specs:
            if spec.name == name:
                return spec
        return None

    def updates_for(self, routine: str) -> Tuple[GhostUpdate, ...]:
        return tuple(u for u in self.updates if u.routine == routine)

    def asserts_for(self, routine: str) -> Tuple[GhostAssert, ...]:
        return tuple(a for a in self.asserts if a.routine == routine)

    def guard_constants(self) -> List[str]:
        used: Set[str] = set()
        for item in list(self.updates) + list(self.asserts):
            if item.guard is not None:
                used.update(item.guard.constants)
        return sorted(used)


def state_var(thad_id: str) -> str:
    return f"state_{thad_id}"


def fd_var(thad_id: str) -> str:
    return f"fd_{thad_id}"


def _guard(pattern: RoutinePattern, aliases: Iterable[Alias]) -> Optional[Guard]:
    if pattern.constraint is None:
        return None
    target = pattern.constraint.constant
    alternatives = [a.constant for a in aliases if a.target == target]
    return Guard(pattern.constraint.param, (target, *alternatives))


def plan_annotations(
    thad_set: ThadSet, policy: UpdatePolicy = UpdatePolicy.GUARDED
) -> AnnotationPlan:
    """
    Plan the ghost instrumentation for a THAD set.

    Args:
        thad_set: Valid THAD set.
        policy: GUARDED wraps updates of constrained dependencies in their
            discriminator guard; AS_PRINTED leaves every update unguarded.

    Returns:
        AnnotationPlan with one declaration, update and assert per THAD,
        plus one descriptor ghost per binding.
    """
    decls: List[GhostDecl] = []
    updates: List[GhostUpdate] = []
    asserts: List[GhostAssert] = []
    for thad in thad_set.sorted_thads():
        state = state_var(thad.id)
        decls.append(GhostDecl(state, thad.id, 0))
        descriptor: Optional[str] = None
        fd_source: Optional[str] = None
        fd_param: Optional[str] = None
        if thad.binding is not None:
            descriptor = fd_var(thad.id)
            decls.append(GhostDecl(descriptor, thad.id, None))
            if thad.binding.source is BindingSource.PARAM:
                fd_source = thad.binding.source_param
            fd_param = thad.binding.target_param
        update_guard = _guard(thad.dependency, thad_set.aliases)
        if policy is UpdatePolicy.AS_PRINTED:
            update_guard = None
        updates.append(
            GhostUpdate(thad.id, thad.dependency.routine, update_guard, state, descriptor, fd_source)
        )
        asserts.append(
            GhostAssert(
                thad.id,
                thad.dependent.routine,
                _guard(thad.dependent, thad_set.aliases),
                state,
                descriptor,
                fd_param,
            )
        )

    plan = AnnotationPlan(tuple(decls), tuple(updates), tuple(asserts), policy=policy)
    used = plan.guard_constants()
    touched = set(plan.routines)
    return AnnotationPlan(
        plan.ghost_decls,
        plan.updates,
        plan.asserts,
        {name: thad_set.constants[name] for name in used},
        policy,
        tuple(r for r in thad_set.routines if r.name in touched),
    )
