from pathlib import Path
import io
import json
import sys

import jsonschema
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from checker.verdicts import VerdictStatus, check, exit_code
from config import CORPUS_DIR, CORPUS_EXPECTED_DIR, SPIDEV_SPEC_PATH
from frontend.pipeline import analyze_source, load_program
from reporting.corpus import (
    load_fixture,
    load_fixtures,
    relevance_matrix,
    run_corpus,
    summary_frame,
)
from reporting.graph import dependency_graph, to_dot, to_text
from reporting.render import render_text, use_color
from reporting.report import build_report, oracle_summary, report_json, summarize, validate_report
from specio.loader import bundled_spidev

SPIDEV = bundled_spidev()

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


@pytest.fixture(scope="module")
def checked():
    thad_set = SPIDEV.select(["d1", "d4", "d24", "d25"])
    program = analyze_source(SPEED_ON_ONE_BRANCH, thad_set, "example.c")
    return program, thad_set, check(program, thad_set)


@pytest.fixture(scope="module")
def corpus_results():
    return run_corpus(CORPUS_DIR, n_jobs=1)


def test_report_matches_schema(checked) -> None:
    program, thad_set, verdicts = checked
    report = build_report(program, thad_set, verdicts, [SPIDEV_SPEC_PATH], None, 1.5)
    validate_report(report)

    assert [entry["id"] for entry in report["thads"]] == ["d1", "d4", "d24", "d25"]
    d24 = report["thads"][2]
    assert d24["status"] == "violated"
    assert d24["feasibility"] == "not-proven"
    assert [step["line"] for step in d24["witness"]] == [2, 5]
    assert d24["witness"][0]["file"] == "example.c"
    assert report["thads"][3]["trivially_satisfied"]
    assert report["wall_time_ms"] == 1.5


def test_schema_rejects_unknown_status(checked) -> None:
    program, thad_set, verdicts = checked
    report = build_report(program, thad_set, verdicts)
    report["thads"][0]["status"] = "maybe"
    with pytest.raises(jsonschema.ValidationError):
        validate_report(report)


def test_report_json_is_deterministic_without_timing(checked) -> None:
    program, thad_set, verdicts = checked
    first = report_json(build_report(program, thad_set, verdicts))
    second = report_json(build_report(program, thad_set, list(reversed(verdicts))))
    assert first == second
    assert "wall_time_ms" not in json.loads(first)
    assert first.endswith("}\n")


def test_summary_counts_add_up(checked) -> None:
    _, _, verdicts = checked
    summary = summarize(verdicts)
    assert summary == {
        "total": 4,
        "satisfied": 2,
        "violated": 1,
        "inconclusive": 0,
        "trivially_satisfied": 1,
    }
    parts = ("satisfied", "violated", "inconclusive", "trivially_satisfied")
    assert sum(summary[key] for key in parts) == summary["total"]


def test_oracle_summary() -> None:
    thad_set = SPIDEV.select(["d1", "d24"])
    program = analyze_source(SPEED_ON_ONE_BRANCH, thad_set, "example.c")
    verdicts = check(program, thad_set)
    assert oracle_summary(verdicts, {"d1": True, "d24": False}, 0)["agrees"]
    disagreeing = oracle_summary(verdicts, {"d1": False, "d24": False}, 2)
    assert disagreeing == {"unroll": 2, "agrees": False, "disagreements": ["d1"]}


def test_render_text(checked) -> None:
    program, thad_set, verdicts = checked
    text = render_text(build_report(program, thad_set, verdicts))
    lines = text.splitlines()
    assert lines[0] == "thadc 0.1.0: example.c (entry main)"
    assert any(line.strip().startswith("d24") and line.endswith(": violated") for line in lines)
    assert any("satisfied (trivially)" in line for line in lines)
    assert "witness (not-proven): open @ example.c:2 -> read" in text
    assert lines[-1].startswith("summary: 2 satisfied, 1 violated, 0 inconclusive")
    assert "\033[" not in text
    assert "\033[31mviolated" in render_text(build_report(program, thad_set, verdicts), True)


def test_use_color(monkeypatch) -> None:
    monkeypatch.delenv("THADC_COLOR", raising=False)
    assert not use_color(io.StringIO())
    assert use_color(io.StringIO(), "always")
    monkeypatch.setenv("THADC_COLOR", "always")
    assert use_color(io.StringIO())
    monkeypatch.setenv("THADC_COLOR", "never")
    assert not use_color(io.StringIO())
    monkeypatch.setenv("THADC_COLOR", "sometimes")
    assert not use_color(io.StringIO())


def test_fixture_loading(tmp_path: Path) -> None:
    fixtures = load_fixtures(CORPUS_DIR)
    assert [f.name for f in fixtures] == [
        "accelerometer",
        "accelerometer-faulty",
        "io-expander",
        "spidev-test",
    ]
    faulty = load_fixture(CORPUS_EXPECTED_DIR / "accelerometer-faulty.json")
    assert faulty.exit_code == 1
    assert faulty.witness_end == {"d24": "read", "d26": "ioctl"}

    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"program": "x.c"}))
    with pytest.raises(ValueError):
        load_fixture(broken)
    with pytest.raises(FileNotFoundError):
        load_fixture(tmp_path / "missing.json")


def test_corpus_fixtures_hold(corpus_results) -> None:
    for result in corpus_results:
        assert result.passed, (result.fixture.name, result.mismatches)


def test_relevance_matrix(corpus_results) -> None:
    matrix = relevance_matrix(corpus_results)
    assert list(matrix.columns) == [
        "accelerometer",
        "accelerometer-faulty",
        "io-expander",
        "spidev-test",
    ]
    assert matrix.loc["d3", "io-expander"] == "•"
    assert matrix.loc["d8", "accelerometer"] == "(•)"
    assert matrix.loc["d8", "accelerometer-faulty"] == "(•)"
    assert matrix.loc["d24", "accelerometer-faulty"] == "×"
    assert matrix.loc["d26", "accelerometer-faulty"] == "×"
    assert matrix.loc["d14", "accelerometer-faulty"] == ""
    assert matrix.loc["d8", "io-expander"] == ""
    assert "d1" not in matrix.index


def test_summary_frame(corpus_results) -> None:
    summary = summary_frame(corpus_results).set_index("program")
    assert summary.loc["accelerometer-faulty.c", "violated"] == 2
    assert summary.loc["accelerometer-faulty.c", "non_trivial"] == 6
    assert summary.loc["accelerometer-faulty.c", "exit_code"] == 1
    assert summary.loc["spidev-test.c", "non_trivial"] == 11
    assert summary["passed"].all()


FULL_SET_VIOLATIONS = {
    "accelerometer.c": {"d15", "d17", "d18", "d20", "d21", "d23"},
    "accelerometer-faulty.c": {"d15", "d17", "d18", "d20", "d21", "d23", "d24", "d26"},
    "io-expander.c": {"d17", "d20", "d23"},
    "spidev-test.c": {"d20"},
}


@pytest.mark.parametrize("program", sorted(FULL_SET_VIOLATIONS))
def test_corpus_against_whole_spidev_set(program: str) -> None:
    analyzed = load_program(CORPUS_DIR / program, SPIDEV)
    verdicts = check(analyzed, SPIDEV)
    violated = {v.thad_id for v in verdicts if v.status is VerdictStatus.VIOLATED}
    assert len(verdicts) == 26
    assert violated == FULL_SET_VIOLATIONS[program]
    assert exit_code(verdicts) == 1


def test_io_expander_relevance_without_selection() -> None:
    verdicts = check(load_program(CORPUS_DIR / "io-expander.c", SPIDEV), SPIDEV)
    non_trivial = {v.thad_id for v in verdicts if not v.trivially_satisfied}
    satisfied = {
        v.thad_id
        for v in verdicts
        if v.status is VerdictStatus.SATISFIED and not v.trivially_satisfied
    }
    assert non_trivial == {"d3", "d4", "d14", "d17", "d20", "d23", "d26"}
    assert satisfied == {"d3", "d4", "d14", "d26"}


def test_dependency_graph() -> None:
    graph = dependency_graph(SPIDEV.select(["d1", "d3", "d15"]))
    assert graph.number_of_edges() == 3
    dot = to_dot(graph)
    assert dot.startswith("digraph thads {\n")
    assert '  open -> read [label="d1"];' in dot
    assert '  "ioctl[request=WR_MODE32]" -> read [label="d15"];' in dot
    text = to_text(graph)
    assert "  -> ioctl[request=MSG] (d3)" in text
    assert to_text(dependency_graph(SPIDEV.select([]))) == ""
