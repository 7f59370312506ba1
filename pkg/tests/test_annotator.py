from pathlib import Path
import sys

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from annotator.emitter import annotate_source, emit_annotated_source, emit_wrapper
from annotator.interpreter import interpret_plan
from annotator.plan import AnnotationMode, Guard, UpdatePolicy, plan_annotations
from config import (
    CORPUS_HAL_DIR,
    LOOP_FREE_PROGRAMS,
    RANDOM_STATE,
    SPIDEV_CONSTS_PATH,
    SPIDEV_FD_OVERLAY_PATH,
)
from errors import AnnotationLayoutError, MissingRoutine
from generators.campaign import annotation_agreement, generate_cases
from model.thad import CallEvent, ThadSet
from specio.loader import bundled_spidev, load_constants
from specio.parser import parse_thad_spec

SPIDEV = bundled_spidev()
BOUND = bundled_spidev([SPIDEV_FD_OVERLAY_PATH])
OPEN_IOCTL_HAL = (CORPUS_HAL_DIR / "open-ioctl-hal.c").read_text(encoding="utf-8")
SPIDEV_HAL = (CORPUS_HAL_DIR / "spidev-hal.c").read_text(encoding="utf-8")


def inserted_lines(annotated) -> list:
    lines = annotated.text.splitlines()
    return [lines[i].strip() for i in annotated.inserted]


def test_plan_for_one_constrained_thad() -> None:
    plan = plan_annotations(SPIDEV.select(["d3"]))
    assert [d.name for d in plan.ghost_decls] == ["state_d3"]
    assert plan.routines == ("open", "ioctl")
    assert plan.updates_for("open")[0].guard is None
    assert plan.asserts_for("ioctl")[0].guard == Guard("request", ("MSG",))
    assert plan.constants == {"MSG": 1075866368}


def test_plan_adds_descriptor_ghosts_for_bindings() -> None:
    plan = plan_annotations(BOUND.select(["d1", "d15"]))
    names = [d.name for d in plan.ghost_decls]
    assert names == ["state_d1", "fd_d1", "state_d15", "fd_d15"]
    by_id = {u.thad_id: u for u in plan.updates}
    assert by_id["d1"].fd_from_return
    assert by_id["d15"].fd_source == "fd"


def test_as_printed_policy_drops_update_guards() -> None:
    thad_set = SPIDEV.select(["d15"])
    assert plan_annotations(thad_set).updates[0].guard == Guard("request", ("WR_MODE32",))
    assert plan_annotations(thad_set, UpdatePolicy.AS_PRINTED).updates[0].guard is None


def test_single_thad_annotation_of_open_ioctl_shim() -> None:
    annotated = annotate_source(plan_annotations(SPIDEV.select(["d3"])), OPEN_IOCTL_HAL)
    assert inserted_lines(annotated) == [
        "/*@ ghost int state_d3 = 0; */",
        "",
        "/*@ ghost state_d3 = 1; */",
        "if (request == MSG) {",
        "/*@ assert (state_d3 == 1); */",
        "}",
    ]
    text = annotated.text
    assert text.index("state_d3 = 1") < text.index("return ret;")
    assert "    if (request == MSG) {\n        /*@ assert (state_d3 == 1); */\n    }\n" in text
    assert text.index("assert (state_d3") < text.index("return __real_ioctl")


def test_set_annotation_of_spidev_shim() -> None:
    annotated = annotate_source(plan_annotations(BOUND.select(["d1", "d8", "d15"])), SPIDEV_HAL)
    lines = inserted_lines(annotated)
    for expected in (
        "/*@ ghost int state_d1 = 0; */",
        "/*@ ghost int fd_d1; */",
        "/*@ ghost int state_d8 = 0; */",
        "/*@ ghost int state_d15 = 0; */",
        "/*@ ghost state_d1 = 1; */",
        "/*@ ghost fd_d1 = ret; */",
        "/*@ ghost state_d8 = 1; */",
        "/*@ ghost fd_d8 = ret; */",
        "if (request == WR_MODE32) {",
        "/*@ assert (state_d8 == 1 && fd == fd_d8); */",
        "/*@ ghost state_d15 = 1; */",
        "/*@ ghost fd_d15 = fd; */",
        "/*@ assert (state_d1 == 1 && fd == fd_d1); */",
        "/*@ assert (state_d15 == 1 && fd == fd_d15); */",
    ):
        assert expected in lines, expected

    text = annotated.text
    ioctl = text[text.index("int ioctl(") :]
    assert ioctl.index("assert (state_d8") < ioctl.index("__real_ioctl")
    assert ioctl.index("__real_ioctl") < ioctl.index("state_d15 = 1")
    read = text[text.index("int read(") : text.index("int write(")]
    assert "state_d15 = 1" not in read
    assert read.index("assert (state_d15") < read.index("__real_read")


def test_annotation_only_inserts_lines() -> None:
    plan = plan_annotations(BOUND)
    for mode in AnnotationMode:
        annotated = annotate_source(plan, SPIDEV_HAL, mode)
        assert annotated.strip_insertions() == SPIDEV_HAL


def test_crlf_line_endings_are_kept() -> None:
    source = SPIDEV_HAL.replace("\n", "\r\n")
    annotated = annotate_source(plan_annotations(SPIDEV.select(["d1", "d15"])), source)
    assert annotated.strip_insertions() == source
    assert "\n" not in annotated.text.replace("\r\n", "")


def test_assert_mode_uses_plain_c() -> None:
    annotated = annotate_source(
        plan_annotations(SPIDEV.select(["d3"])), OPEN_IOCTL_HAL, AnnotationMode.ASSERT
    )
    assert annotated.text.startswith("#include <assert.h>\n")
    assert "int state_d3 = 0;" in annotated.text
    assert "assert(state_d3 == 1);" in annotated.text
    assert annotated.strip_insertions() == OPEN_IOCTL_HAL
    plan = plan_annotations(SPIDEV.select(["d3"]))
    assert emit_annotated_source(plan, OPEN_IOCTL_HAL, AnnotationMode.ASSERT) == annotated.text


def test_missing_routine() -> None:
    with pytest.raises(MissingRoutine) as info:
        annotate_source(plan_annotations(SPIDEV.select(["d1"])), OPEN_IOCTL_HAL)
    assert info.value.name == "read"


def test_brace_on_statement_line_is_rejected() -> None:
    thad_set = parse_thad_spec(
        "routine open(path, oflag)\nroutine read(fd, buf, nbyte)\ndep d1: read requires open\n", {}
    ).parsed
    source = (
        "int read(int fd, int buf, int n) { return 0; }\n"
        "\n"
        "int open(int p, int o)\n{\n    return 1;\n}\n"
    )
    with pytest.raises(AnnotationLayoutError):
        annotate_source(plan_annotations(thad_set), source)


def test_empty_plan_leaves_source_untouched() -> None:
    annotated = annotate_source(plan_annotations(ThadSet()), OPEN_IOCTL_HAL)
    assert annotated.text == OPEN_IOCTL_HAL
    assert annotated.inserted == ()


def test_wrapper_for_empty_set_is_header_only() -> None:
    text = emit_wrapper(ThadSet())
    assert text.startswith("/*\n * THAD wrapper generated by thadc")
    assert "0 routines, 0 THADs" in text
    assert "int " not in text


def test_wrapper_forwards_every_routine() -> None:
    text = emit_wrapper(SPIDEV.select(["d3"]), AnnotationMode.ASSERT)
    assert "#define MSG 1075866368" in text
    assert text.count("#define MSG") == 1
    for routine in ("open", "read", "write", "close", "ioctl"):
        assert f"int __real_{routine}(" in text
        assert f"int {routine}(" in text
    assert "if (request == MSG) {" in text
    assert "#include <assert.h>" in text


def test_interpreter_tracks_descriptors() -> None:
    plan = plan_annotations(BOUND.select(["d1"]))
    good = [CallEvent("open", produced_token="t1"), CallEvent("read", descriptor_token="t1")]
    other = [
        CallEvent("open", produced_token="t1"),
        CallEvent("open", produced_token="t2"),
        CallEvent("read", descriptor_token="t1"),
    ]
    assert interpret_plan(plan, good) == set()
    assert interpret_plan(plan, other) == {"d1"}
    assert interpret_plan(plan, [CallEvent("read", descriptor_token="t1")]) == {"d1"}


def test_interpreter_respects_guards() -> None:
    plan = plan_annotations(SPIDEV.select(["d15"]))
    wrong = [CallEvent("ioctl", "RD_MODE32"), CallEvent("read")]
    right = [CallEvent("ioctl", "WR_MODE32"), CallEvent("read")]
    assert interpret_plan(plan, wrong) == {"d15"}
    assert interpret_plan(plan, right) == set()
    printed = plan_annotations(SPIDEV.select(["d15"]), UpdatePolicy.AS_PRINTED)
    assert interpret_plan(printed, wrong) == set()


def test_ghost_code_agrees_with_trace_semantics() -> None:
    constants = load_constants(SPIDEV_CONSTS_PATH)
    # same draw as the annotation campaign of run_campaigns
    cases = generate_cases(
        LOOP_FREE_PROGRAMS, constants, RANDOM_STATE + 2, descriptors=1, extra_opens=False
    )
    frame = annotation_agreement(cases)
    assert len(frame) == len(cases)
    assert frame["agrees"].all(), frame[~frame["agrees"]].to_string()
