"""
Machine-readable check reports.

A report is a plain dict ready for `json.dumps`; its shape is fixed by
`specs/report.schema.json`. Entries are sorted by THAD id and the summary
counts add up to the number of THADs checked.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema

from checker.verdicts import ThadVerdict, VerdictStatus
from checker.witness import WitnessTrace
from config import REPORT_SCHEMA_PATH, TOOL_NAME, TOOL_VERSION
from frontend.pipeline import AnalyzedProgram
from model.thad import BindingSource, DescriptorBinding, ThadSet
from utils.helpers import natural_key

FEASIBILITY_NOT_PROVEN = "not-proven"


def _binding(binding: Optional[DescriptorBinding]) -> Optional[Dict[str, Any]]:
    if binding is None:
        return None
    source = "return" if binding.source is BindingSource.RETURN else binding.source_param
    return {"source": source, "target": binding.target_param}


def _witness(program: AnalyzedProgram, witness: Optional[WitnessTrace]) -> Optional[List[Dict]]:
    if witness is None:
        return None
    return [
        {
            "routine": item.event.routine,
            "discriminator": item.event.discriminator_value,
            "descriptor": item.event.descriptor_token,
            "file": program.model.filename,
            "line": item.line,
            "column": item.column,
        }
        for item in witness.events
    ]


def summarize(verdicts: Sequence[ThadVerdict]) -> Dict[str, int]:
    """
    Count verdicts by status.

    `satisfied` counts only THADs that were checked against at least one
    call, so the four counts add up to `total`.
    """
    trivial = sum(1 for v in verdicts if v.trivially_satisfied)
    return {
        "total": len(verdicts),
        "satisfied": sum(
            1 for v in verdicts if v.status is VerdictStatus.SATISFIED and not v.trivially_satisfied
        ),
        "violated": sum(1 for v in verdicts if v.status is VerdictStatus.VIOLATED),
        "inconclusive": sum(1 for v in verdicts if v.status is VerdictStatus.INCONCLUSIVE),
        "trivially_satisfied": trivial,
    }


def build_report(
    program: AnalyzedProgram,
    thad_set: ThadSet,
    verdicts: Sequence[ThadVerdict],
    spec_paths: Sequence[Path] = (),
    constants_path: Optional[Path] = None,
    wall_time_ms: Optional[float] = None,
    oracle: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Assemble the report of one `check` run.

    Args:
        program: Analyzed program.
        thad_set: THADs that were checked.
        verdicts: Verdicts from `checker.verdicts.check`.
        spec_paths: Spec files the set was loaded from.
        constants_path: Constants file, if any.
        wall_time_ms: Elapsed time; omitted from the report when None.
        oracle: Result of the oracle cross-check, if it ran.

    Returns:
        Report dict matching the bundled schema.
    """
    entries = []
    for verdict in sorted(verdicts, key=lambda v: natural_key(v.thad_id)):
        thad = thad_set.thad(verdict.thad_id)
        if thad is None:
            raise ValueError(f"verdict for unknown THAD {verdict.thad_id}")
        violated = verdict.status is VerdictStatus.VIOLATED
        entries.append(
            {
                "id": thad.id,
                "dependency": str(thad.dependency),
                "dependent": str(thad.dependent),
                "binding": _binding(thad.binding),
                "status": verdict.status.value,
                "trivially_satisfied": verdict.trivially_satisfied,
                "via_alias": verdict.via_alias,
                "reason": verdict.reason,
                "feasibility": FEASIBILITY_NOT_PROVEN if violated else None,
                "witness": _witness(program, verdict.witness),
            }
        )

    report: Dict[str, Any] = {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "spec": [str(p) for p in spec_paths],
        "constants": str(constants_path) if constants_path is not None else None,
        "program": program.model.filename,
        "entry": program.model.entry,
        "thads": entries,
        "summary": summarize(verdicts),
    }
    if oracle is not None:
        report["oracle"] = oracle
    if wall_time_ms is not None:
        report["wall_time_ms"] = round(wall_time_ms, 3)
    return report


def oracle_summary(
    verdicts: Sequence[ThadVerdict], oracle: Dict[str, bool], unroll: int
) -> Dict[str, Any]:
    """
    Compare checker verdicts with brute-force results.

    Inconclusive verdicts are not compared. A Satisfied verdict disagrees
    when the oracle finds a violating walk; a Violated verdict disagrees
    when every walk satisfies the THAD (with loops, the walks are bounded
    so only the first kind of disagreement is a soundness issue).
    """
    disagreements = [
        v.thad_id
        for v in verdicts
        if v.status is not VerdictStatus.INCONCLUSIVE
        and (v.status is VerdictStatus.SATISFIED) != oracle[v.thad_id]
    ]
    return {
        "unroll": unroll,
        "agrees": not disagreements,
        "disagreements": sorted(disagreements, key=natural_key),
    }


def load_schema(path: Path = REPORT_SCHEMA_PATH) -> Dict[str, Any]:
    if not path.exists():
        raise FileNotFoundError(f"Report schema not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        return json.load(handle)


def validate_report(report: Dict[str, Any], schema: Optional[Dict[str, Any]] = None) -> None:
    """
    Validate a report against the bundled schema.

    Raises:
        jsonschema.ValidationError: If the report does not match.
    """
    jsonschema.validate(instance=report, schema=schema or load_schema())


def report_json(report: Dict[str, Any]) -> str:
    """Serialize deterministically (stable key order, two-space indent)."""
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
