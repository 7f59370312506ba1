"""
Random MiniC programs and random THAD sets for property campaigns.

Programs call the spidev-shaped HAL (open/read/write/close/ioctl) and
branch on the parameters of `main`, so every branch is a free choice for
the analysis. Descriptors are opened once at the top of `main` and never
reassigned; discriminators are written as header macros, bare constant
names, integer literals or through a local variable. Every HAL call
therefore resolves.
"""

from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config import MAX_BRANCHES, MAX_HAL_CALLS
from model.thad import (
    Alias,
    BindingSource,
    Constraint,
    DescriptorBinding,
    Param,
    ParamRole,
    RoutinePattern,
    RoutineSpec,
    Thad,
    ThadSet,
)

CONDITIONS = ("c0", "c1", "c2", "c3")
DESCRIPTOR_VARS = ("fd", "fd2")
INDENT = "    "

HAL_ROUTINES: Tuple[RoutineSpec, ...] = (
    RoutineSpec("open", (Param("path"), Param("oflag")), returns_descriptor=True),
    RoutineSpec("read", (Param("fd", ParamRole.DESCRIPTOR), Param("buf"), Param("nbyte"))),
    RoutineSpec("write", (Param("fd", ParamRole.DESCRIPTOR), Param("buf"), Param("nbyte"))),
    RoutineSpec("close", (Param("fd", ParamRole.DESCRIPTOR),)),
    RoutineSpec(
        "ioctl",
        (
            Param("fd", ParamRole.DESCRIPTOR),
            Param("request", ParamRole.DISCRIMINATOR),
            Param("arg"),
        ),
    ),
)


@dataclass
class _Call:
    lines: List[str]


@dataclass
class _If:
    condition: str
    then: List["_Stmt"]
    otherwise: List["_Stmt"]


@dataclass
class _While:
    condition: str
    body: List["_Stmt"]


@dataclass
class _Return:
    pass


_Stmt = Union[_Call, _If, _While, _Return]


@dataclass
class _Budget:
    branches: int
    extra_opens: bool
    descriptors: Tuple[str, ...]
    request_vars: int = 0


class _ProgramBuilder:
    def __init__(
        self, rng: np.random.Generator, constants: Mapping[str, int], budget: _Budget
    ):
        self.rng = rng
        self.constants = sorted(constants)
        self.values = dict(constants)
        self.budget = budget

    def pick(self, items: Sequence[str]) -> str:
        return items[int(self.rng.integers(len(items)))]

    def _request(self) -> Tuple[List[str], str]:
        """Setup lines and the discriminator expression of one ioctl."""
        name = self.pick(self.constants)
        style = int(self.rng.integers(4))
        if style == 0:
            return [], f"SPI_IOC_{name}"
        if style == 1:
            return [], name
        if style == 2:
            return [], str(self.values[name])
        var = f"req{self.budget.request_vars}"
        self.budget.request_vars += 1
        return [f"int {var} = SPI_IOC_{name};"], var

    def call(self, descriptors: Sequence[str]) -> _Call:
        routines = ["read", "write", "close", "ioctl", "ioctl"]
        if self.budget.extra_opens:
            routines.append("open")
        routine = self.pick(routines)
        fd = self.pick(descriptors)
        if routine == "open":
            return _Call(['open("/dev/spidev0.1", 2);'])
        if routine in ("read", "write"):
            return _Call([f"{routine}({fd}, buf, sizeof(buf));"])
        if routine == "close":
            return _Call([f"close({fd});"])
        setup, request = self._request()
        return _Call(setup + [f"ioctl({fd}, {request}, &arg);"])

    def block(self, calls: int, descriptors: Sequence[str], allow_return: bool) -> List[_Stmt]:
        stmts: List[_Stmt] = []
        while calls > 0:
            if self.budget.branches > 0 and self.rng.random() < 0.35:
                self.budget.branches -= 1
                inside = int(self.rng.integers(1, calls + 1))
                then_calls = int(self.rng.integers(0, inside + 1))
                then = self.block(then_calls, descriptors, allow_return)
                otherwise = self.block(inside - then_calls, descriptors, allow_return)
                if allow_return and self.rng.random() < 0.15:
                    then.append(_Return())
                stmts.append(_If(self.pick(CONDITIONS), then, otherwise))
                calls -= inside
                continue
            stmts.append(self.call(descriptors))
            calls -= 1
        return stmts


def _render(stmts: Sequence[_Stmt], depth: int) -> List[str]:
    pad = INDENT * depth
    lines: List[str] = []
    for stmt in stmts:
        if isinstance(stmt, _Call):
            lines.extend(pad + line for line in stmt.lines)
        elif isinstance(stmt, _Return):
            lines.append(pad + "return 0;")
        elif isinstance(stmt, _While):
            lines.append(f"{pad}while ({stmt.condition}) {{")
            lines.extend(_render(stmt.body, depth + 1))
            lines.append(pad + "}")
        else:
            lines.append(f"{pad}if ({stmt.condition}) {{")
            lines.extend(_render(stmt.then, depth + 1))
            if stmt.otherwise:
                lines.append(pad + "} else {")
                lines.extend(_render(stmt.otherwise, depth + 1))
            lines.append(pad + "}")
    return lines


def random_program(
    rng: np.random.Generator,
    constants: Mapping[str, int],
    max_calls: int = MAX_HAL_CALLS,
    max_branches: int = MAX_BRANCHES,
    loop: bool = False,
    descriptors: int = 1,
    extra_opens: bool = True,
    helper: Optional[bool] = None,
) -> str:
    """
    Generate one MiniC program.

    Args:
        rng: Seeded numpy generator.
        constants: Constants table; ioctl requests are drawn from it.
        max_calls: Upper bound on HAL call sites, the descriptor opens included.
        max_branches: Upper bound on `if` statements.
        loop: Add exactly one `while` loop to `main`.
        descriptors: 1 or 2 descriptors opened at the top of `main`.
        extra_opens: Allow bare `open` calls whose descriptor is dropped.
        helper: Move some calls into a helper taking the descriptor as a
            parameter; drawn at random when None.

    Returns:
        Program text with entry function `main`.
    """
    if descriptors not in (1, 2):
        raise ValueError("descriptors must be 1 or 2")
    if max_calls < descriptors + 1:
        raise ValueError("max_calls must leave room for one call besides the opens")
    if not constants:
        raise ValueError("constants table is empty")

    fds = DESCRIPTOR_VARS[:descriptors]
    budget = _Budget(max_branches, extra_opens, fds)
    builder = _ProgramBuilder(rng, constants, budget)
    calls = int(rng.integers(1, max_calls - descriptors + 1))
    if helper is None:
        helper = bool(rng.random() < 0.3)

    helper_calls = int(rng.integers(1, calls)) if helper and calls > 1 else 0
    main_calls = calls - helper_calls
    loop_calls = int(rng.integers(1, main_calls + 1)) if loop and main_calls > 0 else 0
    before = int(rng.integers(0, main_calls - loop_calls + 1))
    after = main_calls - loop_calls - before

    body: List[_Stmt] = builder.block(before, fds, allow_return=True)
    if helper_calls:
        helper_stmts = builder.block(helper_calls, ("fd",), allow_return=False)
        body.append(_Call([f"configure({builder.pick(fds)});"]))
    if loop_calls:
        body.append(_While(builder.pick(CONDITIONS), builder.block(loop_calls, fds, False)))
    body.extend(builder.block(after, fds, allow_return=True))

    lines: List[str] = []
    if helper_calls:
        lines += ["static int configure(int fd) {", f"{INDENT}int arg = 0;", f"{INDENT}char buf[8];"]
        lines += _render(helper_stmts, 1)
        lines += [f"{INDENT}return 0;", "}", ""]
    params = ", ".join(f"int {c}" for c in CONDITIONS)
    header = [f"int main({params}) {{", f"{INDENT}int arg = 0;", f"{INDENT}char buf[8];"]
    header += [f'{INDENT}int {fd} = open("/dev/spidev0.{i}", 2);' for i, fd in enumerate(fds)]
    lines += header + _render(body, 1) + [f"{INDENT}return 0;", "}"]
    return "\n".join(lines) + "\n"


def _pattern(
    rng: np.random.Generator, routine: RoutineSpec, constants: Sequence[str]
) -> RoutinePattern:
    discriminator = routine.discriminator_param
    if discriminator is None or rng.random() < 0.3:
        return RoutinePattern(routine.name)
    constant = constants[int(rng.integers(len(constants)))]
    return RoutinePattern(routine.name, Constraint(discriminator.name, constant))


def _binding(
    rng: np.random.Generator, dependent: RoutineSpec, dependency: RoutineSpec
) -> Optional[DescriptorBinding]:
    target = dependent.descriptor_param
    if target is None:
        return None
    choices: List[DescriptorBinding] = []
    if dependency.returns_descriptor:
        choices.append(DescriptorBinding(BindingSource.RETURN, target.name))
    source = dependency.descriptor_param
    if source is not None:
        choices.append(DescriptorBinding(BindingSource.PARAM, target.name, source.name))
    if not choices:
        return None
    return choices[int(rng.integers(len(choices)))]


def random_thad_set(
    rng: np.random.Generator,
    constants: Mapping[str, int],
    routines: Sequence[RoutineSpec] = HAL_ROUTINES,
    max_thads: int = 6,
    bind_probability: float = 0.3,
    alias_probability: float = 0.3,
) -> ThadSet:
    """
    Generate a valid THAD set over ``routines``.

    Args:
        rng: Seeded numpy generator.
        constants: Constants table for discriminator constraints.
        routines: Routine vocabulary; every routine is declared.
        max_thads: Upper bound on the number of THADs (at least one).
        bind_probability: Chance that a THAD gets a descriptor binding.
        alias_probability: Chance of adding one alias.

    Returns:
        ThadSet with ids d1..dn.
    """
    names = sorted(constants)
    count = int(rng.integers(1, max_thads + 1))
    thads: List[Thad] = []
    while len(thads) < count:
        dependent_spec = routines[int(rng.integers(len(routines)))]
        dependency_spec = routines[int(rng.integers(len(routines)))]
        dependent = _pattern(rng, dependent_spec, names)
        dependency = _pattern(rng, dependency_spec, names)
        if dependent == dependency:
            continue
        binding = None
        if rng.random() < bind_probability:
            binding = _binding(rng, dependent_spec, dependency_spec)
        thads.append(Thad(f"d{len(thads) + 1}", dependent, dependency, binding))

    aliases: Tuple[Alias, ...] = ()
    if len(names) > 1 and rng.random() < alias_probability:
        picked = rng.choice(len(names), size=2, replace=False)
        aliases = (Alias(names[int(picked[0])], names[int(picked[1])]),)
    return ThadSet(tuple(routines), tuple(thads), dict(constants), aliases)
