"""
Exceptions and diagnostics shared by the thadc pipeline.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple


@dataclass(frozen=True)
class Diagnostic:
    """A located message produced while parsing a spec or a program."""

    line: int
    column: int
    severity: str
    code: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def format(self, filename: str) -> str:
        """Render as `file:line:col: severity: message`."""
        return f"{filename}:{self.line}:{self.column}: {self.severity}: {self.code}: {self.message}"


def error(line: int, column: int, code: str, message: str) -> Diagnostic:
    return Diagnostic(line, column, "error", code, message)


def warning(line: int, column: int, code: str, message: str) -> Diagnostic:
    return Diagnostic(line, column, "warning", code, message)


class ThadcError(Exception):
    """Base class for every error raised by thadc."""


class DiagnosticsError(ThadcError):
    """An input could not be processed; carries the collected diagnostics."""

    def __init__(self, filename: str, diagnostics: Sequence[Diagnostic]):
        self.filename = filename
        self.diagnostics: List[Diagnostic] = list(diagnostics)
        errors = [d for d in self.diagnostics if d.is_error]
        first = errors[0].format(filename) if errors else filename
        super().__init__(f"{len(errors)} error(s); first: {first}")


class SpecParseError(DiagnosticsError):
    """A `.thad` or `.consts` file is invalid."""


class ProgramParseError(DiagnosticsError):
    """A C source is outside MiniC or lacks its entry function."""


class RecursionDetected(ThadcError):
    def __init__(self, cycle: Sequence[str]):
        self.cycle: Tuple[str, ...] = tuple(cycle)
        super().__init__("recursion among user functions: " + " -> ".join(self.cycle))


class DepthLimitExceeded(ThadcError):
    def __init__(self, chain: Sequence[str], limit: int):
        self.chain: Tuple[str, ...] = tuple(chain)
        self.limit = limit
        super().__init__(
            f"inlining depth {len(self.chain) - 1} exceeds limit {limit}: " + " -> ".join(self.chain)
        )


class MissingRoutine(ThadcError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"HAL source does not define routine '{name}'")


class AnnotationLayoutError(ThadcError):
    """The HAL source cannot receive line insertions at a required point."""


class PathExplosion(ThadcError):
    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"path enumeration exceeded the cap of {cap} paths")
