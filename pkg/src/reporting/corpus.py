"""
Corpus harness: checks each bundled program against its expected fixture
and assembles the relevance matrix (THAD x program).

Fixture format (`corpus/expected/<name>.json`)::

    {
      "program": "accelerometer.c",
      "overlays": ["spidev-legacy-mode.thad"],
      "select": ["d3", "d4", "d8"],
      "expected": {"d3": "satisfied"},
      "non_trivial": ["d3", "d4", "d8"],
      "exit_code": 0,
      "witness_end": {"d24": "read"}
    }

`overlays` are resolved against the specs directory, `program` against
the corpus directory. `select`, `expected`, `witness_end` are optional.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from joblib import Parallel, delayed

from checker.verdicts import ThadVerdict, VerdictStatus, check, exit_code
from config import (
    CORPUS_DIR,
    CORPUS_N_JOBS,
    SPECS_DIR,
    SPIDEV_CONSTS_PATH,
    SPIDEV_SPEC_PATH,
)
from frontend.pipeline import load_program
from specio.loader import load_constants, load_thad_spec
from utils.helpers import sorted_ids

logger = logging.getLogger(__name__)

_REQUIRED_KEYS = ("program", "non_trivial", "exit_code")
_STATUSES = {s.value for s in VerdictStatus}


@dataclass(frozen=True)
class CorpusFixture:
    name: str
    program: str
    overlays: Tuple[str, ...] = ()
    select: Optional[Tuple[str, ...]] = None
    expected: Dict[str, str] = field(default_factory=dict)
    non_trivial: Tuple[str, ...] = ()
    exit_code: int = 0
    witness_end: Dict[str, str] = field(default_factory=dict)


@dataclass
class CorpusResult:
    fixture: CorpusFixture
    verdicts: List[ThadVerdict]
    exit_code: int
    mismatches: List[str]
    wall_time_ms: float

    @property
    def passed(self) -> bool:
        return not self.mismatches


def load_fixture(path: Path) -> CorpusFixture:
    """
    Load one expected-result fixture.

    Args:
        path: Path to the fixture JSON.

    Returns:
        CorpusFixture named after the file stem.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If required keys are missing or a status is unknown.
    """
    if not path.exists():
        raise FileNotFoundError(f"Fixture not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        data = json.load(handle)

    missing = [key for key in _REQUIRED_KEYS if key not in data]
    if missing:
        raise ValueError(f"{path}: missing keys {missing}")
    expected = dict(data.get("expected", {}))
    unknown = {status for status in expected.values() if status not in _STATUSES}
    if unknown:
        raise ValueError(f"{path}: unknown statuses {sorted(unknown)}")
    select = data.get("select")
    return CorpusFixture(
        name=path.stem,
        program=data["program"],
        overlays=tuple(data.get("overlays", ())),
        select=tuple(select) if select is not None else None,
        expected=expected,
        non_trivial=tuple(data["non_trivial"]),
        exit_code=int(data["exit_code"]),
        witness_end=dict(data.get("witness_end", {})),
    )


def load_fixtures(corpus_dir: Path = CORPUS_DIR) -> List[CorpusFixture]:
    """All fixtures under `<corpus_dir>/expected`, ordered by name."""
    expected_dir = corpus_dir / "expected"
    if not expected_dir.is_dir():
        raise FileNotFoundError(f"No expected/ directory in corpus: {corpus_dir}")
    paths = sorted(expected_dir.glob("*.json"), key=lambda path: path.stem)
    return [load_fixture(path) for path in paths]


def _mismatches(
    fixture: CorpusFixture, verdicts: Sequence[ThadVerdict], code: int
) -> List[str]:
    by_id = {v.thad_id: v for v in verdicts}
    problems: List[str] = []
    for thad_id in sorted_ids(fixture.expected):
        verdict = by_id.get(thad_id)
        want = fixture.expected[thad_id]
        if verdict is None:
            problems.append(f"{thad_id}: not checked")
        elif verdict.status.value != want:
            problems.append(f"{thad_id}: expected {want}, got {verdict.status.value}")

    non_trivial = [v.thad_id for v in verdicts if not v.trivially_satisfied]
    if sorted_ids(non_trivial) != sorted_ids(fixture.non_trivial):
        problems.append(
            f"non-trivial THADs: expected {sorted_ids(fixture.non_trivial)}, "
            f"got {sorted_ids(non_trivial)}"
        )
    if code != fixture.exit_code:
        problems.append(f"exit code: expected {fixture.exit_code}, got {code}")

    for thad_id, routine in sorted(fixture.witness_end.items()):
        verdict = by_id.get(thad_id)
        if verdict is None or verdict.witness is None or not verdict.witness.events:
            problems.append(f"{thad_id}: no witness")
        elif verdict.witness.events[-1].event.routine != routine:
            last = verdict.witness.events[-1].event.routine
            problems.append(f"{thad_id}: witness ends at {last}, expected {routine}")
    return problems


def run_fixture(
    fixture: CorpusFixture,
    corpus_dir: Path = CORPUS_DIR,
    spec_paths: Sequence[Path] = (SPIDEV_SPEC_PATH,),
    consts_path: Path = SPIDEV_CONSTS_PATH,
    specs_dir: Path = SPECS_DIR,
) -> CorpusResult:
    """
    Check one corpus program and compare against its fixture.

    The fixture's overlays are loaded after `spec_paths`, in order.

    Returns:
        CorpusResult listing every mismatch (empty when the fixture holds).
    """
    start = time.perf_counter()
    constants = load_constants(consts_path)
    overlays = [specs_dir / name for name in fixture.overlays]
    thad_set = load_thad_spec([*spec_paths, *overlays], constants)
    if fixture.select is not None:
        thad_set = thad_set.select(fixture.select)
    program = load_program(corpus_dir / fixture.program, thad_set)
    verdicts = check(program, thad_set)
    code = exit_code(verdicts)
    elapsed = (time.perf_counter() - start) * 1000.0
    problems = _mismatches(fixture, verdicts, code)
    for problem in problems:
        logger.warning("%s: %s", fixture.name, problem)
    return CorpusResult(fixture, verdicts, code, problems, elapsed)


def run_corpus(
    corpus_dir: Path = CORPUS_DIR,
    n_jobs: int = CORPUS_N_JOBS,
    spec_paths: Sequence[Path] = (SPIDEV_SPEC_PATH,),
    consts_path: Path = SPIDEV_CONSTS_PATH,
) -> List[CorpusResult]:
    """
    Run every fixture of a corpus directory.

    Args:
        corpus_dir: Directory holding the programs and `expected/`.
        n_jobs: Programs checked concurrently.
        spec_paths: Base THAD spec and any overlays applied to every fixture.
        consts_path: Constants table.

    Returns:
        Results ordered by fixture name.
    """
    fixtures = load_fixtures(corpus_dir)
    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(run_fixture)(fixture, corpus_dir, spec_paths, consts_path) for fixture in fixtures
    )
    logger.debug("checked %d corpus programs", len(fixtures))
    return sorted(results, key=lambda r: r.fixture.name)


def matrix_mark(verdict: ThadVerdict) -> str:
    """Relevance-matrix cell: blank when trivial, (•) when matched through an alias."""
    if verdict.status is VerdictStatus.VIOLATED:
        return "×"
    if verdict.status is VerdictStatus.INCONCLUSIVE:
        return "?"
    if verdict.trivially_satisfied:
        return ""
    return "(•)" if verdict.via_alias else "•"


def relevance_matrix(results: Sequence[CorpusResult]) -> pd.DataFrame:
    """
    THAD x program matrix of marks.

    THADs a program was not checked against (outside its selection) are
    left blank like trivially satisfied ones.
    """
    columns: Dict[str, Dict[str, str]] = {}
    ids: List[str] = []
    for result in results:
        columns[result.fixture.name] = {v.thad_id: matrix_mark(v) for v in result.verdicts}
        ids.extend(columns[result.fixture.name])
    index = sorted_ids(ids)
    matrix = pd.DataFrame(
        {name: [cells.get(i, "") for i in index] for name, cells in columns.items()},
        index=pd.Index(index, name="thad"),
    )
    return matrix


def summary_frame(results: Sequence[CorpusResult]) -> pd.DataFrame:
    """One row per program: counts, exit code, pass/fail, time."""
    rows = []
    for result in results:
        statuses = pd.Series([v.status.value for v in result.verdicts], dtype="object")
        trivial = sum(1 for v in result.verdicts if v.trivially_satisfied)
        rows.append(
            {
                "program": result.fixture.program,
                "thads": len(result.verdicts),
                "non_trivial": len(result.verdicts) - trivial,
                "violated": int((statuses == VerdictStatus.VIOLATED.value).sum()),
                "inconclusive": int((statuses == VerdictStatus.INCONCLUSIVE.value).sum()),
                "exit_code": result.exit_code,
                "passed": result.passed,
                "wall_time_ms": round(result.wall_time_ms, 1),
            }
        )
    return pd.DataFrame(rows)
