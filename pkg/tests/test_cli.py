from pathlib import Path
import json
import sys

import jsonschema
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from cli import commands
from cli.commands import annotated_path
from cli.main import main
from config import CORPUS_DIR, CORPUS_HAL_DIR, SPIDEV_FD_OVERLAY_PATH, SPIDEV_SPEC_PATH
from reporting.report import validate_report

UNRESOLVED_REQUEST = """\
int main(int c) {
    int fd = open("/dev/spidev0.0", 2);
    int r = 1075866368;
    if (c) r = 1074031365;
    ioctl(fd, r, 0);
    return 0;
}
"""


def test_check_satisfied_program(capsys) -> None:
    code = main(["check", str(CORPUS_DIR / "io-expander.c"), "--select", "d3,d4,d14,d26"])
    out = capsys.readouterr().out
    assert code == 0
    assert "summary: 4 satisfied, 0 violated" in out


def test_check_faulty_program_writes_json(tmp_path: Path) -> None:
    output = tmp_path / "report.json"
    code = main(
        [
            "check",
            str(CORPUS_DIR / "accelerometer-faulty.c"),
            "--format",
            "json",
            "--no-timing",
            "-o",
            str(output),
        ]
    )
    report = json.loads(output.read_text(encoding="utf-8"))
    assert code == 1
    validate_report(report)
    assert "wall_time_ms" not in report
    statuses = {entry["id"]: entry["status"] for entry in report["thads"]}
    assert statuses["d15"] == "violated"
    assert statuses["d1"] == "satisfied"


def test_check_inconclusive_program(tmp_path: Path, capsys) -> None:
    program = tmp_path / "example.c"
    program.write_text(UNRESOLVED_REQUEST)
    code = main(["check", str(program), "--select", "d26"])
    out = capsys.readouterr().out
    assert code == 3
    assert "reason: unresolved discriminator of ioctl at" in out


def test_check_with_oracle(capsys) -> None:
    code = main(
        ["check", str(CORPUS_DIR / "io-expander.c"), "--select", "d3,d4", "--unroll", "1"]
    )
    assert code == 0
    assert "oracle (unroll 1): agrees" in capsys.readouterr().out


def test_input_errors_exit_2(tmp_path: Path, capsys) -> None:
    assert main(["check", str(tmp_path / "missing.c")]) == 2

    bad_spec = tmp_path / "bad.thad"
    bad_spec.write_text("routine open(path\n")
    assert main(["check", str(CORPUS_DIR / "io-expander.c"), "--spec", str(bad_spec)]) == 2
    assert "bad.thad:1:18: error:" in capsys.readouterr().err

    assert main(["check", str(CORPUS_DIR / "io-expander.c"), "--select", "d99"]) == 2
    assert main(["check"]) == 2


def test_unknown_subcommand_is_a_usage_error() -> None:
    with pytest.raises(SystemExit) as info:
        main(["verify"])
    assert info.value.code == 2


def test_annotate_writes_next_to_source(tmp_path: Path) -> None:
    hal = tmp_path / "hal.c"
    hal.write_text((CORPUS_HAL_DIR / "spidev-hal.c").read_text(encoding="utf-8"))
    code = main(
        [
            "annotate",
            str(hal),
            "--spec",
            str(SPIDEV_SPEC_PATH),
            "--spec",
            str(SPIDEV_FD_OVERLAY_PATH),
            "--select",
            "d1,d8,d15",
        ]
    )
    assert code == 0
    annotated = annotated_path(hal)
    assert annotated.name == "hal.annotated.c"
    text = annotated.read_text(encoding="utf-8")
    assert "/*@ assert (state_d1 == 1 && fd == fd_d1); */" in text


def test_annotate_missing_routine_exits_2(tmp_path: Path) -> None:
    output = tmp_path / "out.c"
    code = main(
        [
            "annotate",
            str(CORPUS_HAL_DIR / "open-ioctl-hal.c"),
            "--select",
            "d1",
            "-o",
            str(output),
        ]
    )
    assert code == 2
    assert not output.exists()


def test_annotate_wrapper(capsys) -> None:
    code = main(["annotate", "--wrapper", "--select", "d3", "--mode", "assert"])
    out = capsys.readouterr().out
    assert code == 0
    assert "#include <assert.h>" in out
    assert "int ioctl(int fd, int request, int arg) {" in out


def test_explain(capsys) -> None:
    assert main(["explain", "--select", "d1,d15"]) == 0
    dot = capsys.readouterr().out
    assert dot.startswith("digraph thads {")
    assert '[label="d15"]' in dot

    assert main(["explain", "--select", "d1", "--format", "text"]) == 0
    assert capsys.readouterr().out == "open:\n  -> read (d1)\n"


def test_schema_failure_exits_2(monkeypatch, capsys) -> None:
    def reject(report) -> None:
        raise jsonschema.ValidationError("'maybe' is not one of the statuses")

    monkeypatch.setattr(commands, "validate_report", reject)
    code = main(
        ["check", str(CORPUS_DIR / "io-expander.c"), "--select", "d3", "--format", "json"]
    )
    assert code == 2
    assert "error: report does not match its schema:" in capsys.readouterr().err


def test_corpus_applies_every_spec(tmp_path: Path, capsys) -> None:
    assert main(["check", "--corpus", str(CORPUS_DIR), "--no-timing"]) == 0
    capsys.readouterr()

    overlay = tmp_path / "mode-sets-speed.thad"
    overlay.write_text("alias WR_MODE satisfies WR_MAX_SPEED_HZ\n")
    code = main(
        [
            "check",
            "--corpus",
            str(CORPUS_DIR),
            "--spec",
            str(SPIDEV_SPEC_PATH),
            "--spec",
            str(overlay),
            "--format",
            "json",
            "--no-timing",
        ]
    )
    payload = json.loads(capsys.readouterr().out)
    assert code == 1
    faulty = payload["mismatches"]["accelerometer-faulty"]
    assert "d26: expected violated, got satisfied" in faulty
    assert payload["mismatches"]["io-expander"] == []
