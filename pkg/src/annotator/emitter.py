"""
Insertion of the planned ghost instrumentation into C sources.

The emitter only ever inserts whole lines: ghost declarations before the
first function definition, asserts right after the opening brace of each
dependent routine and updates right before each `return` (or the closing
brace) of each dependency routine. Removing the inserted lines gives back
the input byte for byte.
"""

import bisect
import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from annotator.plan import (
    AnnotationMode,
    AnnotationPlan,
    GhostAssert,
    GhostUpdate,
    Guard,
    UpdatePolicy,
    plan_annotations,
)
from config import TOOL_NAME, TOOL_VERSION
from errors import AnnotationLayoutError, MissingRoutine
from frontend.preprocess import code_mask
from model.thad import ThadSet

logger = logging.getLogger(__name__)

INDENT = "    "

_ASSERT_INCLUDE = re.compile(r"#\s*include\s*<assert\.h>")
_PARAM_NAME = re.compile(r"([A-Za-z_]\w*)\s*(?:\[[^\]]*\]\s*)*$")
_RETURN = re.compile(r"\breturn\b")


@dataclass(frozen=True)
class AnnotatedSource:
    """Annotated text plus the 0-based indices of the inserted lines."""

    text: str
    inserted: Tuple[int, ...]

    def strip_insertions(self) -> str:
        lines = self.text.splitlines(keepends=True)
        skip = set(self.inserted)
        return "".join(line for index, line in enumerate(lines) if index not in skip)


@dataclass(frozen=True)
class _Definition:
    name: str
    params: Tuple[str, ...]
    declaration_line: int
    open_brace: int
    close_brace: int


class _SourceLayout:
    """Offsets, lines and function definitions of a C source."""

    def __init__(self, source: str):
        self.source = source
        self.mask = code_mask(source)
        self.line_starts = [0] + [m.end() for m in re.finditer(r"\n", source)]
        self.depth = self._brace_depths()

    def _brace_depths(self) -> List[int]:
        depths: List[int] = []
        depth = 0
        for ch in self.mask:
            if ch == "}":
                depth -= 1
            depths.append(depth)
            if ch == "{":
                depth += 1
        return depths

    def line_of(self, offset: int) -> int:
        return bisect.bisect_right(self.line_starts, offset) - 1

    def line_text(self, line: int) -> str:
        start = self.line_starts[line]
        end = self.line_starts[line + 1] if line + 1 < len(self.line_starts) else len(self.mask)
        return self.mask[start:end]

    def indentation(self, line: int) -> str:
        text = self.line_text(line)
        return text[: len(text) - len(text.lstrip(" \t"))]

    def _matching(self, offset: int, opening: str, closing: str) -> int:
        level = 0
        for index in range(offset, len(self.mask)):
            ch = self.mask[index]
            if ch == opening:
                level += 1
            elif ch == closing:
                level -= 1
                if level == 0:
                    return index
        raise AnnotationLayoutError(f"unbalanced '{opening}' at offset {offset}")

    def _declaration_line(self, name: str, offset: int) -> int:
        line = self.line_of(offset)
        prefix = self.mask[self.line_starts[line] : offset]
        if not re.fullmatch(r"[\w\s\*]*", prefix):
            raise AnnotationLayoutError(f"cannot place declarations before '{name}'")
        if not prefix.strip() and line > 0:
            previous = self.line_text(line - 1).strip()
            if previous and not previous.startswith("#") and re.fullmatch(r"[\w\s\*]+", previous):
                return line - 1
        return line

    def definitions(self) -> Dict[str, _Definition]:
        found: Dict[str, _Definition] = {}
        for match in re.finditer(r"\b([A-Za-z_]\w*)\s*\(", self.mask):
            name = match.group(1)
            if name in found or self.depth[match.start()] != 0:
                continue
            if name in ("if", "while", "for", "switch", "return", "sizeof"):
                continue
            open_paren = match.end() - 1
            close_paren = self._matching(open_paren, "(", ")")
            rest = self.mask[close_paren + 1 :]
            stripped = rest.lstrip()
            if not stripped.startswith("{"):
                continue
            open_brace = close_paren + 1 + (len(rest) - len(stripped))
            close_brace = self._matching(open_brace, "{", "}")
            found[name] = _Definition(
                name,
                self._params(self.mask[open_paren + 1 : close_paren]),
                self._declaration_line(name, match.start()),
                open_brace,
                close_brace,
            )
        return found

    @staticmethod
    def _params(text: str) -> Tuple[str, ...]:
        names: List[str] = []
        for part in text.split(","):
            part = part.strip()
            if not part or part == "..." or part == "void":
                continue
            match = _PARAM_NAME.search(part)
            names.append(match.group(1) if match else part)
        return tuple(names)


class _Renderer:
    """Formats ghost statements for one annotation mode."""

    def __init__(self, mode: AnnotationMode):
        self.mode = mode

    def declaration(self, name: str, initializer: Optional[int]) -> str:
        init = f" = {initializer}" if initializer is not None else ""
        if self.mode is AnnotationMode.ACSL:
            return f"/*@ ghost int {name}{init}; */"
        return f"int {name}{init};"

    def assignment(self, name: str, value: str) -> str:
        if self.mode is AnnotationMode.ACSL:
            return f"/*@ ghost {name} = {value}; */"
        return f"{name} = {value};"

    def check(self, condition: str) -> str:
        if self.mode is AnnotationMode.ACSL:
            return f"/*@ assert ({condition}); */"
        return f"assert({condition});"


def _guard_text(guard: Guard, param: str) -> str:
    return " || ".join(f"{param} == {constant}" for constant in guard.constants)


def _grouped(items: Sequence, key) -> List[Tuple[Optional[Guard], List]]:
    """Group items by guard: unguarded first, then guards in first-use order."""
    groups: Dict[Optional[Guard], List] = {}
    for item in items:
        groups.setdefault(key(item), []).append(item)
    ordered = sorted(groups.items(), key=lambda pair: pair[0] is not None)
    return ordered


class _Annotator:
    def __init__(self, plan: AnnotationPlan, source: str, mode: AnnotationMode):
        self.plan = plan
        self.layout = _SourceLayout(source)
        self.renderer = _Renderer(mode)
        self.mode = mode
        self.insertions: Dict[int, List[str]] = {}

    def insert(self, before_line: int, lines: List[str]) -> None:
        self.insertions.setdefault(before_line, []).extend(lines)

    def _param(self, definition: _Definition, routine: str, spec_param: Optional[str]) -> str:
        spec = self.plan.routine_spec(routine)
        if spec_param is None:
            return ""
        if spec is not None and spec.param(spec_param) is not None:
            index = spec.param_index(spec_param)
            if index < len(definition.params):
                return definition.params[index]
        return spec_param

    def _guarded(
        self, definition: _Definition, guard: Optional[Guard], body: List[str], indent: str
    ) -> List[str]:
        if guard is None:
            return [indent + line for line in body]
        param = self._param(definition, definition.name, guard.param)
        return (
            [f"{indent}if ({_guard_text(guard, param)}) {{"]
            + [indent + INDENT + line for line in body]
            + [f"{indent}}}"]
        )

    def _assert_lines(self, definition: _Definition, indent: str) -> List[str]:
        lines: List[str] = []
        asserts = self.plan.asserts_for(definition.name)
        for guard, group in _grouped(asserts, lambda a: a.guard):
            body = [self._assert_statement(definition, item) for item in group]
            lines.extend(self._guarded(definition, guard, body, indent))
        return lines

    def _assert_statement(self, definition: _Definition, item: GhostAssert) -> str:
        condition = f"{item.state_var} == 1"
        if item.fd_var is not None:
            fd_param = self._param(definition, item.routine, item.fd_param)
            condition += f" && {fd_param} == {item.fd_var}"
        return self.renderer.check(condition)

    def _update_lines(
        self, definition: _Definition, indent: str, returned: Optional[str]
    ) -> List[str]:
        lines: List[str] = []
        updates = self.plan.updates_for(definition.name)
        for guard, group in _grouped(updates, lambda u: u.guard):
            body: List[str] = []
            for item in group:
                body.extend(self._update_statements(definition, item, returned))
            lines.extend(self._guarded(definition, guard, body, indent))
        return lines

    def _update_statements(
        self, definition: _Definition, item: GhostUpdate, returned: Optional[str]
    ) -> List[str]:
        statements = [self.renderer.assignment(item.state_var, "1")]
        if item.fd_var is None:
            return statements
        if item.fd_from_return:
            if returned is None:
                raise AnnotationLayoutError(
                    f"{definition.name}: a descriptor binding needs `return <identifier>;`"
                )
            value = returned
        else:
            value = self._param(definition, item.routine, item.fd_source)
        statements.append(self.renderer.assignment(item.fd_var, value))
        return statements

    def _annotate_asserts(self, definition: _Definition) -> None:
        if not self.plan.asserts_for(definition.name):
            return
        layout = self.layout
        brace_line = layout.line_of(definition.open_brace)
        line_end = layout.line_starts[brace_line] + len(layout.line_text(brace_line))
        if layout.mask[definition.open_brace + 1 : line_end].strip():
            raise AnnotationLayoutError(
                f"{definition.name}: the opening brace must end its line"
            )
        indent = layout.indentation(brace_line) + INDENT
        for line in range(brace_line + 1, layout.line_of(definition.close_brace)):
            if layout.line_text(line).strip():
                indent = layout.indentation(line)
                break
        self.insert(brace_line + 1, self._assert_lines(definition, indent))

    def _check_statement_start(self, definition: _Definition, offset: int) -> int:
        layout = self.layout
        line = layout.line_of(offset)
        if layout.mask[layout.line_starts[line] : offset].strip():
            raise AnnotationLayoutError(
                f"{definition.name}: line {line + 1} must start with the return statement"
            )
        before = layout.mask[: layout.line_starts[line]].rstrip()
        if before and before[-1] not in ";{}:":
            raise AnnotationLayoutError(
                f"{definition.name}: the return at line {line + 1} needs braces around it"
            )
        return line

    def _annotate_updates(self, definition: _Definition) -> None:
        if not self.plan.updates_for(definition.name):
            return
        layout = self.layout
        start, end = definition.open_brace + 1, definition.close_brace
        returns = [m for m in _RETURN.finditer(layout.mask, start, end)]
        for match in returns:
            line = self._check_statement_start(definition, match.start())
            semicolon = layout.mask.find(";", match.end(), end)
            expression = layout.source[match.end() : semicolon].strip() if semicolon > 0 else ""
            returned = expression if re.fullmatch(r"[A-Za-z_]\w*", expression) else None
            indent = layout.indentation(line)
            self.insert(line, self._update_lines(definition, indent, returned))

        tail = layout.mask[start:end].rstrip()
        ends_with_return = bool(returns) and tail.endswith(";") and (
            tail.rfind(";") == layout.mask.find(";", returns[-1].end(), end) - start
        )
        if not ends_with_return:
            line = self._check_statement_start(definition, definition.close_brace)
            indent = layout.indentation(line) + INDENT
            self.insert(line, self._update_lines(definition, indent, None))

    def _declarations(self, first_line: int) -> None:
        lines: List[str] = []
        identifiers = set(re.findall(r"\b[A-Za-z_]\w*\b", self.layout.mask))
        for name, value in sorted(self.plan.constants.items()):
            if name not in identifiers:
                lines.append(f"#define {name} {value}")
        for decl in self.plan.ghost_decls:
            lines.append(self.renderer.declaration(decl.name, decl.initializer))
        self.insert(first_line, lines + [""])
        if self.mode is AnnotationMode.ASSERT and not _ASSERT_INCLUDE.search(self.layout.source):
            self.insert(0, ["#include <assert.h>"])

    def run(self) -> AnnotatedSource:
        source = self.layout.source
        if not self.plan.ghost_decls:
            return AnnotatedSource(source, ())
        definitions = self.layout.definitions()
        for routine in self.plan.routines:
            if routine not in definitions:
                raise MissingRoutine(routine)
        first_line = min(d.declaration_line for d in definitions.values())
        self._declarations(first_line)
        for routine in self.plan.routines:
            definition = definitions[routine]
            self._annotate_asserts(definition)
            self._annotate_updates(definition)
        return self._assemble()

    def _assemble(self) -> AnnotatedSource:
        source = self.layout.source
        newline = "\r\n" if "\r\n" in source else "\n"
        lines = source.splitlines(keepends=True)
        out: List[str] = []
        inserted: List[int] = []
        for index in range(len(lines) + 1):
            for text in self.insertions.get(index, []):
                if index == len(lines) and out and not out[-1].endswith("\n"):
                    raise AnnotationLayoutError("cannot insert after an unterminated last line")
                inserted.append(len(out))
                out.append(text + newline)
            if index < len(lines):
                out.append(lines[index])
        return AnnotatedSource("".join(out), tuple(inserted))


def annotate_source(
    plan: AnnotationPlan, hal_source: str, mode: AnnotationMode = AnnotationMode.ACSL
) -> AnnotatedSource:
    """
    Insert the plan's statements into a HAL implementation.

    Args:
        plan: Annotation plan.
        hal_source: C source defining every routine the plan touches.
        mode: ACSL ghost comments or plain C globals and assert().

    Returns:
        AnnotatedSource with the inserted line indices.

    Raises:
        MissingRoutine: If a planned routine is not defined in the source.
        AnnotationLayoutError: If a required insertion point does not sit on
            its own line.
    """
    annotated = _Annotator(plan, hal_source, mode).run()
    logger.debug("inserted %d lines", len(annotated.inserted))
    return annotated


def emit_annotated_source(
    plan: AnnotationPlan, hal_source: str, mode: AnnotationMode = AnnotationMode.ACSL
) -> str:
    return annotate_source(plan, hal_source, mode).text


def wrapper_skeleton(thad_set: ThadSet, plan: AnnotationPlan) -> str:
    """Forwarding functions for every routine of the set, without annotations."""
    header = [
        "/*",
        f" * THAD wrapper generated by {TOOL_NAME} {TOOL_VERSION}:"
        f" {len(thad_set.routines)} routines, {len(thad_set.thads)} THADs.",
        " * Link with --wrap=<routine> so calls reach these forwarding functions.",
        " */",
    ]
    if not thad_set.routines:
        return "\n".join(header) + "\n"
    lines = header + [f"#define {name} {value}" for name, value in sorted(plan.constants.items())]
    lines.append("")
    for routine in thad_set.routines:
        params = ", ".join(f"int {p.name}" for p in routine.params) or "void"
        lines.append(f"int __real_{routine.name}({params});")
    for routine in thad_set.routines:
        params = ", ".join(f"int {p.name}" for p in routine.params) or "void"
        args = ", ".join(p.name for p in routine.params)
        lines += [
            "",
            f"int {routine.name}({params}) {{",
            f"{INDENT}int ret = __real_{routine.name}({args});",
            f"{INDENT}return ret;",
            "}",
        ]
    return "\n".join(lines) + "\n"


def emit_wrapper(
    thad_set: ThadSet,
    mode: AnnotationMode = AnnotationMode.ACSL,
    policy: UpdatePolicy = UpdatePolicy.GUARDED,
) -> str:
    """
    Emit a self-contained annotated wrapper for a THAD set.

    Args:
        thad_set: Valid THAD set.
        mode: Annotation mode.
        policy: Update guarding policy.

    Returns:
        MiniC text with one forwarding function per routine.
    """
    plan = plan_annotations(thad_set, policy)
    skeleton = wrapper_skeleton(thad_set, plan)
    return annotate_source(plan, skeleton, mode).text
