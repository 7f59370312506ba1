"""
Parsers for the line-oriented `.thad` and `.consts` languages.

    routine <name>(<param>[:descriptor|:discriminator], ...) [returns descriptor]
    dep <id>: <dependent>[<param>=<CONST>] requires <dependency>[<param>=<CONST>]
    bind <id>: <dependency>.return -> <dependent>.<param>
    bind <id>: <dependency>.<param> -> <dependent>.<param>
    alias <CONST> satisfies <CONST>

    NAME = <integer>

`#` starts a comment. Every problem is reported as a located diagnostic;
a parse result is only built when no error was found.
"""

import re
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Tuple

from errors import Diagnostic, error, warning
from model.thad import (
    Alias,
    BindingSource,
    Constraint,
    DescriptorBinding,
    Param,
    ParamRole,
    RoutinePattern,
    RoutineSpec,
    Thad,
    ThadSet,
)

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>-?(?:0[xX][0-9a-fA-F]+|\d+))|(?P<punct>->|[():,\[\]=.]))")


@dataclass
class SpecDocument:
    """Concrete syntax carrier: source text, parse result and diagnostics."""

    source: str
    parsed: Optional[ThadSet]
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.parsed is not None


@dataclass
class ConstantsDocument:
    source: str
    parsed: Optional[Dict[str, int]]
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.parsed is not None


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    column: int


class _LineError(Exception):
    def __init__(self, column: int, message: str):
        super().__init__(message)
        self.column = column
        self.message = message


class _Cursor:
    """Token stream of one line."""

    def __init__(self, text: str):
        self.tokens: List[_Token] = []
        self.end_column = len(text.rstrip()) + 1
        pos = 0
        while pos < len(text):
            if not text[pos:].strip():
                break
            match = _TOKEN.match(text, pos)
            if match is None or match.end() == pos:
                column = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
                raise _LineError(column, f"unexpected character {text[column - 1]!r}")
            kind = match.lastgroup or ""
            value = match.group(kind)
            self.tokens.append(_Token(kind, value, match.start(kind) + 1))
            pos = match.end()
        self.index = 0

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.index >= len(self.tokens)

    def _column(self) -> int:
        token = self.peek()
        return token.column if token else self.end_column

    def take(self, kind: str, text: Optional[str] = None, what: str = "") -> _Token:
        token = self.peek()
        if token is None or token.kind != kind or (text is not None and token.text != text):
            expected = what or (repr(text) if text else kind)
            found = repr(token.text) if token else "end of line"
            raise _LineError(self._column(), f"expected {expected}, found {found}")
        self.index += 1
        return token

    def accept(self, text: str) -> bool:
        token = self.peek()
        if token is not None and token.text == text:
            self.index += 1
            return True
        return False

    def finish(self) -> None:
        if not self.at_end():
            token = self.peek()
            assert token is not None
            raise _LineError(token.column, f"unexpected {token.text!r}")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def _integer(literal: str) -> int:
    if literal.lstrip("-").lower().startswith("0x"):
        return int(literal, 16)
    return int(literal, 10)


def _lines(text: str) -> List[str]:
    return text.lstrip("\ufeff").splitlines()


@dataclass(frozen=True)
class _PatternAst:
    routine: _Token
    param: Optional[_Token]
    constant: Optional[_Token]


@dataclass(frozen=True)
class _DepAst:
    line: int
    id: _Token
    dependent: _PatternAst
    dependency: _PatternAst


@dataclass(frozen=True)
class _BindAst:
    line: int
    id: _Token
    source_routine: _Token
    source_param: _Token
    target_routine: _Token
    target_param: _Token


def _parse_pattern(cursor: _Cursor) -> _PatternAst:
    routine = cursor.take("ident", what="routine name")
    if cursor.accept("["):
        param = cursor.take("ident", what="parameter name")
        cursor.take("punct", "=")
        constant = cursor.take("ident", what="constant name")
        cursor.take("punct", "]")
        return _PatternAst(routine, param, constant)
    return _PatternAst(routine, None, None)


def _parse_routine(cursor: _Cursor) -> RoutineSpec:
    name = cursor.take("ident", what="routine name")
    cursor.take("punct", "(")
    params: List[Param] = []
    if not cursor.accept(")"):
        while True:
            pname = cursor.take("ident", what="parameter name")
            role = ParamRole.OPAQUE
            if cursor.accept(":"):
                role_token = cursor.take("ident", what="parameter role")
                if role_token.text not in (ParamRole.DESCRIPTOR.value, ParamRole.DISCRIMINATOR.value):
                    raise _LineError(role_token.column, f"unknown parameter role {role_token.text!r}")
                role = ParamRole(role_token.text)
            params.append(Param(pname.text, role))
            if cursor.accept(")"):
                break
            cursor.take("punct", ",", what="',' or ')'")
    returns_descriptor = False
    if cursor.accept("returns"):
        cursor.take("ident", "descriptor")
        returns_descriptor = True
    cursor.finish()
    try:
        return RoutineSpec(name.text, tuple(params), returns_descriptor)
    except ValueError as exc:
        raise _LineError(name.column, str(exc)) from exc


def _parse_dep(cursor: _Cursor, line: int) -> _DepAst:
    thad_id = cursor.take("ident", what="THAD id")
    cursor.take("punct", ":")
    dependent = _parse_pattern(cursor)
    cursor.take("ident", "requires")
    dependency = _parse_pattern(cursor)
    cursor.finish()
    return _DepAst(line, thad_id, dependent, dependency)


def _parse_bind(cursor: _Cursor, line: int) -> _BindAst:
    thad_id = cursor.take("ident", what="THAD id")
    cursor.take("punct", ":")
    source_routine = cursor.take("ident", what="routine name")
    cursor.take("punct", ".")
    source_param = cursor.take("ident", what="'return' or parameter name")
    cursor.take("punct", "->")
    target_routine = cursor.take("ident", what="routine name")
    cursor.take("punct", ".")
    target_param = cursor.take("ident", what="parameter name")
    cursor.finish()
    return _BindAst(line, thad_id, source_routine, source_param, target_routine, target_param)


class _SpecBuilder:
    """Second pass: resolves names and checks the THAD-set invariants."""

    def __init__(self, constants: Mapping[str, int], base: Optional[ThadSet]):
        self.constants = dict(constants)
        self.diagnostics: List[Diagnostic] = []
        self.routines: Dict[str, RoutineSpec] = {}
        self.thads: Dict[str, Thad] = {}
        self.aliases: List[Alias] = []
        if base is not None:
            for name, value in base.constants.items():
                self.constants.setdefault(name, value)
            self.routines = {r.name: r for r in base.routines}
            self.thads = {t.id: t for t in base.thads}
            self.aliases = list(base.aliases)

    def fail(self, line: int, column: int, code: str, message: str) -> None:
        self.diagnostics.append(error(line, column, code, message))

    def add_routine(self, line: int, column: int, spec: RoutineSpec) -> None:
        if spec.name in self.routines:
            self.fail(line, column, "DuplicateId", f"routine {spec.name} declared twice")
            return
        self.routines[spec.name] = spec

    def _pattern(self, line: int, ast: _PatternAst) -> Optional[RoutinePattern]:
        spec = self.routines.get(ast.routine.text)
        if spec is None:
            self.fail(line, ast.routine.column, "UnknownRoutine", f"unknown routine {ast.routine.text}")
            return None
        if ast.param is None or ast.constant is None:
            return RoutinePattern(spec.name)
        param = spec.param(ast.param.text)
        if param is None or param.role is not ParamRole.DISCRIMINATOR:
            self.fail(
                line,
                ast.param.column,
                "InvalidConstraint",
                f"{spec.name}.{ast.param.text} is not a discriminator parameter",
            )
            return None
        if ast.constant.text not in self.constants:
            self.fail(line, ast.constant.column, "UnknownConstant", f"unknown constant {ast.constant.text}")
            return None
        return RoutinePattern(spec.name, Constraint(param.name, ast.constant.text))

    def add_dep(self, ast: _DepAst) -> None:
        if ast.id.text in self.thads:
            self.fail(ast.line, ast.id.column, "DuplicateId", f"THAD {ast.id.text} defined twice")
            return
        dependent = self._pattern(ast.line, ast.dependent)
        dependency = self._pattern(ast.line, ast.dependency)
        if dependent is None or dependency is None:
            return
        if dependent == dependency:
            self.fail(ast.line, ast.dependent.routine.column, "SelfDependency", f"{dependent} depends on itself")
            return
        self.thads[ast.id.text] = Thad(ast.id.text, dependent, dependency)

    def add_bind(self, ast: _BindAst, seen: Dict[str, int]) -> None:
        thad = self.thads.get(ast.id.text)
        if thad is None:
            self.fail(ast.line, ast.id.column, "UnknownThad", f"no THAD {ast.id.text} to bind")
            return
        if ast.id.text in seen:
            self.fail(ast.line, ast.id.column, "DuplicateId", f"THAD {ast.id.text} bound twice")
            return
        seen[ast.id.text] = ast.line
        if ast.source_routine.text != thad.dependency.routine:
            self.fail(
                ast.line,
                ast.source_routine.column,
                "InvalidBinding",
                f"{ast.id.text} depends on {thad.dependency.routine}, not {ast.source_routine.text}",
            )
            return
        if ast.target_routine.text != thad.dependent.routine:
            self.fail(
                ast.line,
                ast.target_routine.column,
                "InvalidBinding",
                f"{ast.id.text} constrains {thad.dependent.routine}, not {ast.target_routine.text}",
            )
            return
        source_spec = self.routines[thad.dependency.routine]
        target_spec = self.routines[thad.dependent.routine]
        target = target_spec.param(ast.target_param.text)
        if target is None or target.role is not ParamRole.DESCRIPTOR:
            self.fail(
                ast.line,
                ast.target_param.column,
                "InvalidBinding",
                f"{target_spec.name}.{ast.target_param.text} is not a descriptor parameter",
            )
            return
        if ast.source_param.text == "return":
            if not source_spec.returns_descriptor:
                self.fail(
                    ast.line,
                    ast.source_param.column,
                    "InvalidBinding",
                    f"{source_spec.name} does not return a descriptor",
                )
                return
            binding = DescriptorBinding(BindingSource.RETURN, target.name)
        else:
            source = source_spec.param(ast.source_param.text)
            if source is None or source.role is not ParamRole.DESCRIPTOR:
                self.fail(
                    ast.line,
                    ast.source_param.column,
                    "InvalidBinding",
                    f"{source_spec.name}.{ast.source_param.text} is not a descriptor parameter",
                )
                return
            binding = DescriptorBinding(BindingSource.PARAM, target.name, source.name)
        self.thads[thad.id] = replace(thad, binding=binding)

    def add_alias(self, line: int, constant: _Token, target: _Token) -> None:
        for token in (constant, target):
            if token.text not in self.constants:
                self.fail(line, token.column, "UnknownConstant", f"unknown constant {token.text}")
                return
        if constant.text == target.text:
            self.fail(line, constant.column, "InvalidConstraint", f"{constant.text} aliases itself")
            return
        alias = Alias(constant.text, target.text)
        if alias in self.aliases:
            self.diagnostics.append(warning(line, constant.column, "DuplicateId", "alias declared twice"))
            return
        self.aliases.append(alias)

    def build(self) -> ThadSet:
        return ThadSet(
            routines=tuple(self.routines.values()),
            thads=tuple(self.thads.values()),
            constants=self.constants,
            aliases=tuple(self.aliases),
        )


def parse_thad_spec(
    text: str,
    constants: Optional[Mapping[str, int]] = None,
    base: Optional[ThadSet] = None,
) -> SpecDocument:
    """
    Parse a THAD specification.

    Args:
        text: Source of a `.thad` file.
        constants: Constants table used to validate constraint constants.
        base: Set this file extends (overlay files add bindings or aliases).

    Returns:
        SpecDocument whose ``parsed`` set is present iff no error was found.
    """
    builder = _SpecBuilder(constants or {}, base)
    deps: List[_DepAst] = []
    binds: List[_BindAst] = []
    alias_lines: List[Tuple[int, _Token, _Token]] = []

    for number, raw in enumerate(_lines(text), start=1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        try:
            cursor = _Cursor(body)
            keyword = cursor.take("ident", what="'routine', 'dep', 'bind' or 'alias'")
            if keyword.text == "routine":
                spec = _parse_routine(cursor)
                builder.add_routine(number, keyword.column, spec)
            elif keyword.text == "dep":
                deps.append(_parse_dep(cursor, number))
            elif keyword.text == "bind":
                binds.append(_parse_bind(cursor, number))
            elif keyword.text == "alias":
                constant = cursor.take("ident", what="constant name")
                cursor.take("ident", "satisfies")
                target = cursor.take("ident", what="constant name")
                cursor.finish()
                alias_lines.append((number, constant, target))
            else:
                raise _LineError(keyword.column, f"unknown declaration {keyword.text!r}")
        except _LineError as exc:
            builder.fail(number, exc.column, "SyntaxError", exc.message)

    for dep in deps:
        builder.add_dep(dep)
    seen: Dict[str, int] = {}
    for bind in binds:
        builder.add_bind(bind, seen)
    for number, constant, target in alias_lines:
        builder.add_alias(number, constant, target)

    diagnostics = sorted(builder.diagnostics, key=lambda d: (d.line, d.column))
    if any(d.is_error for d in diagnostics):
        return SpecDocument(text, None, diagnostics)
    return SpecDocument(text, builder.build(), diagnostics)


def parse_constants(text: str) -> ConstantsDocument:
    """
    Parse a constants table of `NAME = integer` lines.

    Args:
        text: Source of a `.consts` file.

    Returns:
        ConstantsDocument whose ``parsed`` map is present iff no error was found.
    """
    values: Dict[str, int] = {}
    diagnostics: List[Diagnostic] = []

    for number, raw in enumerate(_lines(text), start=1):
        body = _strip_comment(raw)
        if not body.strip():
            continue
        try:
            cursor = _Cursor(body)
            name = cursor.take("ident", what="constant name")
            cursor.take("punct", "=")
            literal = cursor.take("int", what="integer")
            cursor.finish()
        except _LineError as exc:
            diagnostics.append(error(number, exc.column, "SyntaxError", exc.message))
            continue
        value = _integer(literal.text)
        if name.text in values:
            if values[name.text] != value:
                diagnostics.append(
                    error(
                        number,
                        name.column,
                        "ConflictingConstant",
                        f"{name.text} redefined as {value} (was {values[name.text]})",
                    )
                )
            else:
                diagnostics.append(warning(number, name.column, "DuplicateId", f"{name.text} repeated"))
            continue
        values[name.text] = value

    if any(d.is_error for d in diagnostics):
        return ConstantsDocument(text, None, diagnostics)
    return ConstantsDocument(text, values, diagnostics)
