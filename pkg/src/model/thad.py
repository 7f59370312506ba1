"""
THAD domain types: routine patterns, dependencies, call events and sets.

All types are frozen dataclasses; a ThadSet validates its invariants on
construction and raises ValueError when they do not hold.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

from utils.helpers import is_c_identifier, natural_key


class ParamRole(str, Enum):
    DESCRIPTOR = "descriptor"
    DISCRIMINATOR = "discriminator"
    OPAQUE = "opaque"


class BindingSource(str, Enum):
    RETURN = "return"
    PARAM = "param"


@dataclass(frozen=True)
class Param:
    name: str
    role: ParamRole = ParamRole.OPAQUE


@dataclass(frozen=True)
class RoutineSpec:
    """A HAL-API routine: its parameters and whether it yields a descriptor."""

    name: str
    params: Tuple[Param, ...] = ()
    returns_descriptor: bool = False

    def __post_init__(self) -> None:
        if not is_c_identifier(self.name):
            raise ValueError(f"routine name is not a C identifier: {self.name!r}")
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError(f"routine {self.name} has duplicate parameter names")
        for role in (ParamRole.DESCRIPTOR, ParamRole.DISCRIMINATOR):
            if sum(1 for p in self.params if p.role is role) > 1:
                raise ValueError(f"routine {self.name} has more than one {role.value} parameter")

    def param(self, name: str) -> Optional[Param]:
        for p in self.params:
            if p.name == name:
                return p
        return None

    def param_index(self, name: str) -> int:
        for index, p in enumerate(self.params):
            if p.name == name:
                return index
        raise KeyError(name)

    def _role_param(self, role: ParamRole) -> Optional[Param]:
        for p in self.params:
            if p.role is role:
                return p
        return None

    @property
    def descriptor_param(self) -> Optional[Param]:
        return self._role_param(ParamRole.DESCRIPTOR)

    @property
    def discriminator_param(self) -> Optional[Param]:
        return self._role_param(ParamRole.DISCRIMINATOR)


@dataclass(frozen=True)
class Constraint:
    """Equality `param = CONST` on a discriminator parameter."""

    param: str
    constant: str


@dataclass(frozen=True)
class RoutinePattern:
    """A routine reference plus an optional discriminator constraint."""

    routine: str
    constraint: Optional[Constraint] = None

    def __str__(self) -> str:
        if self.constraint is None:
            return self.routine
        return f"{self.routine}[{self.constraint.param}={self.constraint.constant}]"


@dataclass(frozen=True)
class DescriptorBinding:
    """
    The descriptor produced by the dependency must flow into ``target_param``.

    ``source_param`` names the dependency's descriptor parameter when
    ``source`` is PARAM; it is None for RETURN.
    """

    source: BindingSource
    target_param: str
    source_param: Optional[str] = None


@dataclass(frozen=True)
class Thad:
    """One dependency: ``dependent`` must be preceded by ``dependency``."""

    id: str
    dependent: RoutinePattern
    dependency: RoutinePattern
    binding: Optional[DescriptorBinding] = None

    def __post_init__(self) -> None:
        if not is_c_identifier(self.id):
            raise ValueError(f"THAD id is not an identifier: {self.id!r}")
        if self.dependent == self.dependency:
            raise ValueError(f"THAD {self.id} makes {self.dependent} depend on itself")

    def __str__(self) -> str:
        return f"{self.id}: {self.dependency} <| {self.dependent}"


@dataclass(frozen=True)
class CallEvent:
    """One HAL call as seen by the trace semantics."""

    routine: str
    discriminator_value: Optional[str] = None
    descriptor_token: Optional[str] = None
    produced_token: Optional[str] = None


@dataclass(frozen=True)
class Alias:
    """`alias constant satisfies target`: constant stands in for target."""

    constant: str
    target: str


@dataclass(frozen=True)
class ThadSet:
    routines: Tuple[RoutineSpec, ...] = ()
    thads: Tuple[Thad, ...] = ()
    constants: Dict[str, int] = field(default_factory=dict)
    aliases: Tuple[Alias, ...] = ()

    def __post_init__(self) -> None:
        routine_names = [r.name for r in self.routines]
        if len(set(routine_names)) != len(routine_names):
            raise ValueError("duplicate routine declarations")
        ids = [t.id for t in self.thads]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate THAD ids")
        for thad in self.thads:
            for pattern in (thad.dependent, thad.dependency):
                self._check_pattern(thad.id, pattern)
            if thad.binding is not None:
                self._check_binding(thad)
        for alias in self.aliases:
            for name in (alias.constant, alias.target):
                if name not in self.constants:
                    raise ValueError(f"alias uses unknown constant {name}")
            if alias.constant == alias.target:
                raise ValueError(f"constant {alias.constant} aliases itself")

    def _check_pattern(self, thad_id: str, pattern: RoutinePattern) -> None:
        spec = self.routine(pattern.routine)
        if spec is None:
            raise ValueError(f"THAD {thad_id} references unknown routine {pattern.routine}")
        if pattern.constraint is None:
            return
        param = spec.param(pattern.constraint.param)
        if param is None or param.role is not ParamRole.DISCRIMINATOR:
            raise ValueError(
                f"THAD {thad_id}: {pattern.routine}.{pattern.constraint.param} is not a discriminator"
            )
        if pattern.constraint.constant not in self.constants:
            raise ValueError(f"THAD {thad_id} uses unknown constant {pattern.constraint.constant}")

    def _check_binding(self, thad: Thad) -> None:
        binding = thad.binding
        assert binding is not None
        dependent = self.routine(thad.dependent.routine)
        target = dependent.param(binding.target_param) if dependent else None
        if target is None or target.role is not ParamRole.DESCRIPTOR:
            raise ValueError(f"THAD {thad.id}: binding target is not a descriptor parameter")
        dependency = self.routine(thad.dependency.routine)
        assert dependency is not None
        if binding.source is BindingSource.RETURN:
            if not dependency.returns_descriptor:
                raise ValueError(f"THAD {thad.id}: {dependency.name} does not return a descriptor")
        else:
            source = dependency.param(binding.source_param or "")
            if source is None or source.role is not ParamRole.DESCRIPTOR:
                raise ValueError(f"THAD {thad.id}: binding source is not a descriptor parameter")

    def routine(self, name: str) -> Optional[RoutineSpec]:
        for spec in self.routines:
            if spec.name == name:
                return spec
        return None

    def thad(self, thad_id: str) -> Optional[Thad]:
        for thad in self.thads:
            if thad.id == thad_id:
                return thad
        return None

    @property
    def routine_names(self) -> FrozenSet[str]:
        return frozenset(r.name for r in self.routines)

    def sorted_thads(self) -> Tuple[Thad, ...]:
        return tuple(sorted(self.thads, key=lambda t: natural_key(t.id)))

    def select(self, ids: Iterable[str]) -> "ThadSet":
        """Restrict to the given THAD ids, keeping routines, constants and aliases."""
        wanted = set(ids)
        unknown = wanted - {t.id for t in self.thads}
        if unknown:
            raise ValueError("unknown THAD ids: " + ", ".join(sorted(unknown, key=natural_key)))
        return ThadSet(
            routines=self.routines,
            thads=tuple(t for t in self.thads if t.id in wanted),
            constants=dict(self.constants),
            aliases=self.aliases,
        )
