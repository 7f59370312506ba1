from pathlib import Path
import sys

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from checker.dataflow import dataflow_fixpoint
from checker.monitor import Completion
from checker.oracle import brute_force_paths, enumerate_walks
from checker.verdicts import VerdictStatus, check, exit_code
from checker.witness import find_witness
from config import (
    EXIT_INCONCLUSIVE,
    EXIT_SATISFIED,
    EXIT_VIOLATED,
    LOOP_BRANCHES,
    LOOP_FREE_PROGRAMS,
    ONE_LOOP_PROGRAMS,
    SPIDEV_FD_OVERLAY_PATH,
    SPIDEV_LEGACY_MODE_OVERLAY_PATH,
)
from errors import PathExplosion
from frontend.pipeline import analyze_source
from generators.campaign import generate_cases, loop_soundness, oracle_equivalence
from model.semantics import match_event
from model.thad import CallEvent
from specio.loader import bundled_spidev

SPIDEV = bundled_spidev()
BOUND = bundled_spidev([SPIDEV_FD_OVERLAY_PATH])
LEGACY = bundled_spidev([SPIDEV_LEGACY_MODE_OVERLAY_PATH])

SPEED_ON_ONE_BRANCH = """\
int main(int c) {
    int fd = open("/dev/spidev0.0", 2);
    if (c)
        ioctl(fd, SPI_IOC_WR_MAX_SPEED_HZ, 0);
    read(fd, 0, 1);
    close(fd);
    return 0;
}
"""


def verdicts_of(source: str, thad_set, ids):
    selected = thad_set.select(ids)
    program = analyze_source(source, selected, "example.c")
    return program, {v.thad_id: v for v in check(program, selected)}


def test_violation_carries_witness() -> None:
    _, verdicts = verdicts_of(SPEED_ON_ONE_BRANCH, SPIDEV, ["d1", "d4", "d24", "d25"])

    assert verdicts["d1"].status is VerdictStatus.SATISFIED
    assert verdicts["d4"].status is VerdictStatus.SATISFIED
    assert verdicts["d24"].status is VerdictStatus.VIOLATED
    witness = verdicts["d24"].witness
    assert [e.event.routine for e in witness.events] == ["open", "read"]
    assert [e.line for e in witness.events] == [2, 5]
    assert witness.thad_id == "d24"
    assert exit_code(list(verdicts.values())) == EXIT_VIOLATED


def test_witness_search_avoids_completing_calls() -> None:
    selected = SPIDEV.select(["d1", "d24"])
    program = analyze_source(SPEED_ON_ONE_BRANCH, selected, "example.c")
    read = next(n for n, e in program.flow.events.items() if e.routine == "read")

    witness = find_witness(program, selected.thad("d24"), read)
    assert witness.path[-1] == read
    assert [e.event.routine for e in witness.events] == ["open", "read"]
    assert witness.trace[-1].routine == "read"
    with pytest.raises(ValueError):
        find_witness(program, selected.thad("d1"), read)


def test_uncalled_dependent_is_trivially_satisfied() -> None:
    _, verdicts = verdicts_of(SPEED_ON_ONE_BRANCH, SPIDEV, ["d1", "d25"])

    assert verdicts["d25"].status is VerdictStatus.SATISFIED
    assert verdicts["d25"].trivially_satisfied
    assert not verdicts["d1"].trivially_satisfied
    assert verdicts["d25"].witness is None


def test_all_paths_configured_is_satisfied() -> None:
    source = SPEED_ON_ONE_BRANCH.replace("    if (c)\n        ioctl", "    ioctl")

    _, verdicts = verdicts_of(source, SPIDEV, ["d24"])

    assert verdicts["d24"].status is VerdictStatus.SATISFIED
    assert exit_code(list(verdicts.values())) == EXIT_SATISFIED


def test_unknown_discriminator_is_inconclusive() -> None:
    source = """\
int main(int c) {
    int fd = open("/dev/spidev0.0", 2);
    int r = 1075866368;
    if (c) r = 1074031365;
    ioctl(fd, r, 0);
    return 0;
}
"""
    _, verdicts = verdicts_of(source, SPIDEV, ["d3", "d26"])

    assert verdicts["d3"].status is VerdictStatus.SATISFIED
    assert verdicts["d26"].status is VerdictStatus.INCONCLUSIVE
    assert verdicts["d26"].reason == "unresolved discriminator of ioctl at example.c:5"
    assert exit_code(list(verdicts.values())) == EXIT_INCONCLUSIVE


def test_violation_outranks_inconclusive() -> None:
    source = """\
int main(int c) {
    int fd = open("/dev/spidev0.0", 2);
    int r = 1075866368;
    ioctl(fd, MSG, 0);
    if (c) r = 1074031365;
    ioctl(fd, r, 0);
    return 0;
}
"""

    _, verdicts = verdicts_of(source, SPIDEV, ["d26"])

    assert verdicts["d26"].status is VerdictStatus.VIOLATED
    assert verdicts["d26"].witness.events[-1].line == 4


def test_unknown_descriptor_is_inconclusive() -> None:
    source = """\
int main(int c) {
    int fd = open("/dev/spidev0.0", 2);
    int other = open("/dev/spidev0.1", 2);
    int h = fd;
    if (c) h = other;
    read(h, 0, 1);
    return 0;
}
"""
    _, verdicts = verdicts_of(source, BOUND, ["d1"])

    assert verdicts["d1"].status is VerdictStatus.INCONCLUSIVE
    assert "unresolved descriptor of read" in verdicts["d1"].reason


def test_binding_separates_descriptors() -> None:
    source = """\
int main(void) {
    int fd = open("/dev/spidev0.0", 2);
    int other = open("/dev/spidev0.1", 2);
    ioctl(other, SPI_IOC_WR_MODE32, 0);
    read(fd, 0, 1);
    return 0;
}
"""
    _, unbound = verdicts_of(source, SPIDEV, ["d15"])
    _, bound = verdicts_of(source, BOUND, ["d15"])

    assert unbound["d15"].status is VerdictStatus.SATISFIED
    assert bound["d15"].status is VerdictStatus.VIOLATED
    assert [e.event.routine for e in bound["d15"].witness.events] == ["open", "open", "ioctl", "read"]


def test_alias_satisfies_dependency() -> None:
    source = """\
int main(void) {
    int fd = open("/dev/spidev0.0", 2);
    ioctl(fd, SPI_IOC_WR_MODE, 0);
    ioctl(fd, MSG, 0);
    return 0;
}
"""

    _, plain = verdicts_of(source, SPIDEV, ["d8", "d17"])
    _, legacy = verdicts_of(source, LEGACY, ["d8", "d17"])

    assert plain["d17"].status is VerdictStatus.VIOLATED
    assert plain["d8"].trivially_satisfied
    assert legacy["d17"].status is VerdictStatus.SATISFIED
    assert legacy["d17"].via_alias
    assert legacy["d8"].status is VerdictStatus.SATISFIED
    assert not legacy["d8"].trivially_satisfied
    assert legacy["d8"].via_alias


def test_loops_meet_at_the_head() -> None:
    before = """\
int main(int c) {
    int fd = open("/dev/spidev0.0", 2);
    while (c) {
        ioctl(fd, MSG, 0);
        ioctl(fd, WR_MAX_SPEED_HZ, 0);
    }
    return 0;
}
"""
    after = before.replace("    while (c) {", "    do {").replace(
        "    }\n    return", "    } while (c);\n    return"
    )

    _, first = verdicts_of(before, SPIDEV, ["d26"])
    _, second = verdicts_of(after, SPIDEV, ["d26"])

    assert first["d26"].status is VerdictStatus.VIOLATED
    assert second["d26"].status is VerdictStatus.VIOLATED
    swapped = (
        after.replace("MSG", "TMP").replace("WR_MAX_SPEED_HZ", "MSG").replace("TMP", "WR_MAX_SPEED_HZ")
    )
    _, third = verdicts_of(swapped, SPIDEV, ["d26"])
    assert third["d26"].status is VerdictStatus.SATISFIED


def test_monitor_states() -> None:
    program = analyze_source(SPEED_ON_ONE_BRANCH, SPIDEV, "example.c")
    states = dataflow_fixpoint(program, SPIDEV.select(["d1", "d24"]))
    cfg = program.model.entry_cfg
    read = next(n for n, e in program.flow.events.items() if e.routine == "read")

    assert states[read].status("d1") is Completion.COMPLETED
    assert states[read].status("d24") is Completion.NOT_COMPLETED
    assert states[cfg.entry].status("d1") is Completion.NOT_COMPLETED
    assert states[read].status("d99") is Completion.UNREACHABLE


def test_oracle_on_example() -> None:
    selected = SPIDEV.select(["d1", "d24"])
    program = analyze_source(SPEED_ON_ONE_BRANCH, selected, "example.c")

    assert brute_force_paths(program, selected) == {"d1": True, "d24": False}
    assert len(list(enumerate_walks(program.model.entry_cfg))) == 2


def test_oracle_cap() -> None:
    program = analyze_source(SPEED_ON_ONE_BRANCH, SPIDEV, "example.c")

    with pytest.raises(PathExplosion):
        brute_force_paths(program, SPIDEV, cap=1)


def test_oracle_equivalence_on_loop_free_programs() -> None:
    cases = generate_cases(LOOP_FREE_PROGRAMS, SPIDEV.constants)
    results = oracle_equivalence(cases)

    assert len(results) == LOOP_FREE_PROGRAMS
    assert results["agrees"].all(), results[~results["agrees"]].to_string()


def test_satisfied_verdicts_hold_when_loops_unroll() -> None:
    cases = generate_cases(
        ONE_LOOP_PROGRAMS, SPIDEV.constants, seed=7, loop=True, max_branches=LOOP_BRANCHES
    )
    results = loop_soundness(cases)

    assert results["sound"].all(), results[~results["sound"]].to_string()


def _dependency_call(thad) -> str:
    pattern = thad.dependency
    if pattern.routine == "open":
        return 'open("/dev/spidev0.9", 2);'
    if pattern.routine in ("read", "write"):
        return f"{pattern.routine}(0, buf, 1);"
    if pattern.routine == "close":
        return "close(0);"
    if pattern.constraint is None:
        return "ioctl(0, 0, &arg);"
    return f"ioctl(0, SPI_IOC_{pattern.constraint.constant}, &arg);"


def test_dependency_at_entry_never_breaks_a_verdict() -> None:
    marker = "    char buf[8];\n"
    for case in generate_cases(100, SPIDEV.constants, seed=11):
        program = analyze_source(case.source, case.thad_set, "random.c")
        before = {v.thad_id: v.status for v in check(program, case.thad_set)}
        cut = case.source.rfind(marker) + len(marker)
        for thad in case.thad_set.sorted_thads():
            if thad.binding is not None:
                continue
            call = _dependency_call(thad)
            constraint = thad.dependency.constraint
            inserted = CallEvent(thad.dependency.routine, constraint.constant if constraint else None)
            if match_event(thad.dependent, inserted, case.thad_set.aliases):
                continue
            source = case.source[:cut] + "    " + call + "\n" + case.source[cut:]
            single = case.thad_set.select([thad.id])
            after = check(analyze_source(source, single, "random.c"), single)[0].status
            if before[thad.id] is not VerdictStatus.INCONCLUSIVE:
                assert after is VerdictStatus.SATISFIED, (thad, source)
