from pathlib import Path
import sys

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from model.semantics import (
    first_violation,
    match_event,
    matched_via_alias,
    trace_satisfies,
    trace_satisfies_all,
)
from model.thad import (
    Alias,
    BindingSource,
    CallEvent,
    Constraint,
    DescriptorBinding,
    Param,
    ParamRole,
    RoutinePattern,
    RoutineSpec,
    Thad,
    ThadSet,
)

ROUTINES = (
    RoutineSpec("open", (Param("path"), Param("oflag")), returns_descriptor=True),
    RoutineSpec("read", (Param("fd", ParamRole.DESCRIPTOR), Param("buf"), Param("nbyte"))),
    RoutineSpec(
        "ioctl",
        (Param("fd", ParamRole.DESCRIPTOR), Param("request", ParamRole.DISCRIMINATOR), Param("arg")),
    ),
)
CONSTANTS = {"MSG": 1, "WR_MODE": 2, "WR_MODE32": 3}
MSG = RoutinePattern("ioctl", Constraint("request", "MSG"))
WR_MODE32 = RoutinePattern("ioctl", Constraint("request", "WR_MODE32"))


def ev(routine: str, disc: str = None, fd: str = None, produced: str = None) -> CallEvent:
    return CallEvent(routine, disc, fd, produced)


def test_match_event_respects_constraint_and_alias() -> None:
    aliases = (Alias("WR_MODE", "WR_MODE32"),)

    assert match_event(RoutinePattern("ioctl"), ev("ioctl", "MSG"))
    assert match_event(MSG, ev("ioctl", "MSG"))
    assert not match_event(MSG, ev("ioctl", "WR_MODE32"))
    assert not match_event(MSG, ev("ioctl"))
    assert not match_event(WR_MODE32, ev("ioctl", "WR_MODE"))
    assert match_event(WR_MODE32, ev("ioctl", "WR_MODE"), aliases)
    assert matched_via_alias(WR_MODE32, ev("ioctl", "WR_MODE"), aliases)
    assert not matched_via_alias(WR_MODE32, ev("ioctl", "WR_MODE32"), aliases)


def test_alias_is_one_directional() -> None:
    aliases = (Alias("WR_MODE", "WR_MODE32"),)
    legacy = RoutinePattern("ioctl", Constraint("request", "WR_MODE"))

    assert not match_event(legacy, ev("ioctl", "WR_MODE32"), aliases)


def test_unbound_trace_semantics() -> None:
    thad = Thad("d1", RoutinePattern("read"), RoutinePattern("open"))

    assert trace_satisfies(thad, [])
    assert trace_satisfies(thad, [ev("open"), ev("read"), ev("read")])
    assert not trace_satisfies(thad, [ev("read"), ev("open"), ev("read")])
    assert first_violation(thad, [ev("open"), ev("read")]) is None
    assert first_violation(thad, [ev("ioctl", "MSG"), ev("read")]) == 1


def test_violation_is_never_repaired_by_extension() -> None:
    thad = Thad("d17", MSG, WR_MODE32)
    bad = [ev("ioctl", "MSG")]

    assert not trace_satisfies(thad, bad)
    assert not trace_satisfies(thad, bad + [ev("ioctl", "WR_MODE32"), ev("ioctl", "MSG")])


def test_prepending_dependency_repairs_unbound_thad() -> None:
    thad = Thad("d17", MSG, WR_MODE32)
    trace = [ev("ioctl", "MSG"), ev("read")]

    assert not trace_satisfies(thad, trace)
    assert trace_satisfies(thad, [ev("ioctl", "WR_MODE32")] + trace)


def test_bound_trace_semantics_follow_tokens() -> None:
    by_return = Thad(
        "d1",
        RoutinePattern("read"),
        RoutinePattern("open"),
        DescriptorBinding(BindingSource.RETURN, "fd"),
    )
    by_param = Thad(
        "d15",
        RoutinePattern("read"),
        WR_MODE32,
        DescriptorBinding(BindingSource.PARAM, "fd", "fd"),
    )

    assert trace_satisfies(by_return, [ev("open", produced="t1"), ev("read", fd="t1")])
    assert not trace_satisfies(by_return, [ev("open", produced="t1"), ev("read", fd="t2")])
    assert not trace_satisfies(by_return, [ev("open", produced="t1"), ev("read")])
    configured = [ev("ioctl", "WR_MODE32", fd="t1"), ev("read", fd="t1")]
    assert trace_satisfies(by_param, configured)
    assert not trace_satisfies(by_param, [ev("ioctl", "WR_MODE32", fd="t2"), ev("read", fd="t1")])


def test_thad_rejects_self_dependency() -> None:
    with pytest.raises(ValueError):
        Thad("d1", MSG, RoutinePattern("ioctl", Constraint("request", "MSG")))


def test_routine_spec_rejects_two_descriptors() -> None:
    with pytest.raises(ValueError):
        RoutineSpec("dup2", (Param("a", ParamRole.DESCRIPTOR), Param("b", ParamRole.DESCRIPTOR)))


def test_thad_set_validates_references() -> None:
    with pytest.raises(ValueError):
        ThadSet(ROUTINES, (Thad("d1", RoutinePattern("write"), RoutinePattern("open")),), CONSTANTS)
    with pytest.raises(ValueError):
        unknown = RoutinePattern("ioctl", Constraint("request", "NOPE"))
        ThadSet(ROUTINES, (Thad("d1", unknown, RoutinePattern("open")),), CONSTANTS)
    with pytest.raises(ValueError):
        not_disc = RoutinePattern("ioctl", Constraint("arg", "MSG"))
        ThadSet(ROUTINES, (Thad("d1", not_disc, RoutinePattern("open")),), CONSTANTS)
    with pytest.raises(ValueError):
        ThadSet(ROUTINES, (), CONSTANTS, (Alias("WR_MODE", "WR_MODE"),))


def test_thad_set_rejects_binding_without_descriptor() -> None:
    binding = DescriptorBinding(BindingSource.RETURN, "fd")
    with pytest.raises(ValueError):
        ThadSet(ROUTINES, (Thad("d1", RoutinePattern("read"), MSG, binding),), CONSTANTS)


def test_select_keeps_routines_constants_and_aliases() -> None:
    thads = (
        Thad("d1", RoutinePattern("read"), RoutinePattern("open")),
        Thad("d2", MSG, WR_MODE32),
        Thad("d10", MSG, RoutinePattern("open")),
    )
    aliases = (Alias("WR_MODE", "WR_MODE32"),)
    full = ThadSet(ROUTINES, thads, CONSTANTS, aliases)

    subset = full.select(["d10", "d2"])

    assert [t.id for t in subset.sorted_thads()] == ["d2", "d10"]
    assert subset.routines == ROUTINES
    assert subset.constants == CONSTANTS
    assert subset.aliases == aliases
    with pytest.raises(ValueError):
        full.select(["d99"])


def test_trace_satisfies_all_uses_set_aliases() -> None:
    thads = (
        Thad("d1", RoutinePattern("read"), RoutinePattern("open")),
        Thad("d2", MSG, WR_MODE32),
        Thad("d10", MSG, RoutinePattern("open")),
    )
    thad_set = ThadSet(ROUTINES, thads, CONSTANTS, (Alias("WR_MODE", "WR_MODE32"),))

    configured = [ev("open"), ev("ioctl", "WR_MODE"), ev("ioctl", "MSG"), ev("read")]
    result = trace_satisfies_all(thad_set, configured)
    assert list(result) == ["d1", "d2", "d10"]
    assert all(result.values())
    assert trace_satisfies_all(thad_set, [ev("ioctl", "MSG")]) == {
        "d1": True,
        "d2": False,
        "d10": False,
    }
