"""
Text rendering of reports and diagnostics.
"""

import os
from typing import IO, Any, Dict, List, Optional

from config import COLOR_CHOICES, COLOR_ENV_VAR, COLOR_RESET, STATUS_COLORS


def use_color(stream: IO[str], choice: Optional[str] = None) -> bool:
    """
    Decide whether to colour output written to ``stream``.

    Args:
        stream: Output stream.
        choice: `auto`, `never` or `always`; read from THADC_COLOR when None.
            Unknown values behave like `auto`.

    Returns:
        True when ANSI colours should be used.
    """
    if choice is None:
        choice = os.environ.get(COLOR_ENV_VAR, "auto")
    choice = choice.lower()
    if choice not in COLOR_CHOICES:
        choice = "auto"
    if choice == "always":
        return True
    if choice == "never":
        return False
    isatty = getattr(stream, "isatty", None)
    return bool(isatty and isatty())


def _status(status: str, color: bool) -> str:
    if not color:
        return status
    return f"{STATUS_COLORS[status]}{status}{COLOR_RESET}"


def _witness_step(event: Dict[str, Any]) -> str:
    routine = event["routine"]
    if event["discriminator"] is not None:
        routine += f"[{event['discriminator']}]"
    if event["descriptor"] is not None:
        routine += f"({event['descriptor']})"
    return f"{routine} @ {event['file']}:{event['line']}"


def render_text(report: Dict[str, Any], color: bool = False) -> str:
    """Human-readable report: one line per THAD, witnesses and reasons indented."""
    width = max((len(entry["id"]) for entry in report["thads"]), default=2)
    header = f"{report['tool']} {report['version']}: {report['program']}"
    lines: List[str] = [f"{header} (entry {report['entry']})"]
    for entry in report["thads"]:
        status = entry["status"]
        if entry["trivially_satisfied"]:
            label = "satisfied (trivially)"
        else:
            label = _status(status, color)
        if entry["via_alias"]:
            label += " via alias"
        lines.append(
            f"  {entry['id']:<{width}}  {entry['dependency']} <| {entry['dependent']}: {label}"
        )
        if entry["witness"]:
            steps = " -> ".join(_witness_step(e) for e in entry["witness"])
            lines.append(f"  {'':<{width}}    witness ({entry['feasibility']}): {steps}")
        if entry["reason"]:
            lines.append(f"  {'':<{width}}    reason: {entry['reason']}")

    summary = report["summary"]
    lines.append(
        f"summary: {summary['satisfied']} satisfied, {summary['violated']} violated, "
        f"{summary['inconclusive']} inconclusive, "
        f"{summary['trivially_satisfied']} trivially satisfied ({summary['total']} THADs)"
    )
    oracle = report.get("oracle")
    if oracle is not None:
        verdict = "agrees" if oracle["agrees"] else "DISAGREES on " + ", ".join(
            oracle["disagreements"]
        )
        lines.append(f"oracle (unroll {oracle['unroll']}): {verdict}")
    if "wall_time_ms" in report:
        lines.append(f"time: {report['wall_time_ms']:.1f} ms")
    return "\n".join(lines) + "\n"
