"""
Lowering of MiniC sources to per-function control-flow graphs.

pycparser produces the abstract syntax tree; this module walks it once per
function and builds a Cfg. Calls nested in expressions are flattened
left-to-right into Call nodes with temporaries, short-circuit and
conditional operands containing calls become nondeterministic branches,
and conditions that fold to integer constants only build the feasible edge.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set, Tuple

import networkx as nx
from pycparser import c_ast, c_generator, c_parser
from pycparser.c_parser import ParseError

from config import DEFAULT_ENTRY, MINIC_PRELUDE, NORETURN_FUNCTIONS
from errors import Diagnostic, ProgramParseError, error
from frontend.cfg import (
    GLOBAL_PREFIX,
    RETURN_VAR,
    Cfg,
    CfgNode,
    Const,
    FunctionBody,
    Name,
    NodeKind,
    Opaque,
    Operand,
    ProgramModel,
    Var,
)
from frontend.preprocess import preprocess

logger = logging.getLogger(__name__)

Edge = Tuple[int, Optional[str]]

_PARSE_ERROR = re.compile(r"^(?P<file>.*?):(?P<line>\d+):(?P<col>\d+): (?P<msg>.*)$")

_BINARY: Dict[str, Callable[[int, int], int]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "|": lambda a, b: a | b,
    "&": lambda a, b: a & b,
    "^": lambda a, b: a ^ b,
    "<<": lambda a, b: a << b if 0 <= b < 64 else 0,
    ">>": lambda a, b: a >> b if 0 <= b < 64 else 0,
    "==": lambda a, b: int(a == b),
    "!=": lambda a, b: int(a != b),
    "<": lambda a, b: int(a < b),
    ">": lambda a, b: int(a > b),
    "<=": lambda a, b: int(a <= b),
    ">=": lambda a, b: int(a >= b),
    "&&": lambda a, b: int(bool(a) and bool(b)),
    "||": lambda a, b: int(bool(a) or bool(b)),
}

_UNARY: Dict[str, Callable[[int], int]] = {
    "-": lambda a: -a,
    "+": lambda a: a,
    "~": lambda a: ~a,
    "!": lambda a: int(not a),
}

_INCREMENTS = ("++", "--", "p++", "p--")


def integer_literal(text: str) -> Optional[int]:
    """Value of a C integer or character literal, or None."""
    if text.startswith("'"):
        body = text[1:-1]
        if len(body) == 1:
            return ord(body)
        escapes = {"\\n": 10, "\\t": 9, "\\r": 13, "\\0": 0, "\\\\": 92, "\\'": 39}
        return escapes.get(body)
    digits = text.rstrip("uUlL")
    try:
        if re.fullmatch(r"0[0-7]+", digits):
            return int(digits, 8)
        return int(digits, 0)
    except ValueError:
        return None


class _CallFinder(c_ast.NodeVisitor):
    def __init__(self) -> None:
        self.found = False

    def visit_FuncCall(self, node: c_ast.FuncCall) -> None:
        self.found = True


def _has_call(node: Optional[c_ast.Node]) -> bool:
    if node is None:
        return False
    finder = _CallFinder()
    finder.visit(node)
    return finder.found


def _strip_casts(node: c_ast.Node) -> c_ast.Node:
    while isinstance(node, c_ast.Cast):
        node = node.expr
    return node


@dataclass
class _SwitchContext:
    branch: Optional[int]
    labels: Set[str] = field(default_factory=set)
    has_default: bool = False


class _FunctionLowerer:
    """Builds the Cfg of one function definition."""

    def __init__(
        self,
        definition: c_ast.FuncDef,
        global_names: Set[str],
        defines: Dict[str, int],
        diagnostics: List[Diagnostic],
    ):
        self.definition = definition
        self.name: str = definition.decl.name
        self.global_names = global_names
        self.defines = defines
        self.diagnostics = diagnostics
        self.generator = c_generator.CGenerator()
        self.graph = nx.DiGraph()
        self.locals: Set[str] = set()
        self.temps = 0
        self.breaks: List[List[Edge]] = []
        self.continues: List[List[Edge]] = []
        self.switches: List[_SwitchContext] = []

        line = self._line(definition)
        self.entry = self._add(CfgNode(NodeKind.ENTRY, line, 1, text=self.name))
        self.exit = self._add(CfgNode(NodeKind.EXIT, line, 1, text=self.name))
        self.frontier: List[Edge] = [(self.entry, None)]
        self.params = self._params(definition.decl)

    # graph plumbing

    def _add(self, payload: CfgNode) -> int:
        node_id = self.graph.number_of_nodes()
        self.graph.add_node(node_id, node=payload)
        return node_id

    def _connect(self, edges: List[Edge], target: int) -> None:
        for source, label in edges:
            if self.graph.has_edge(source, target):
                # a second edge between the same pair goes through its own join
                line = self.graph.nodes[source]["node"].line
                join = self._add(CfgNode(NodeKind.JOIN, line))
                self.graph.add_edge(source, join, label=label)
                self.graph.add_edge(join, target)
            elif label is None:
                self.graph.add_edge(source, target)
            else:
                self.graph.add_edge(source, target, label=label)

    def _emit(self, payload: CfgNode) -> Optional[int]:
        """Append a node after the current frontier; None when the code is dead."""
        if not self.frontier:
            return None
        if len(self.frontier) > 1 and payload.kind is not NodeKind.JOIN:
            self._emit(CfgNode(NodeKind.JOIN, payload.line, payload.column))
        node_id = self._add(payload)
        self._connect(self.frontier, node_id)
        self.frontier = [(node_id, None)]
        return node_id

    # diagnostics and locations

    @staticmethod
    def _line(node: Optional[c_ast.Node]) -> int:
        coord = getattr(node, "coord", None)
        return coord.line if coord is not None and coord.line else 0

    @staticmethod
    def _column(node: Optional[c_ast.Node]) -> int:
        coord = getattr(node, "coord", None)
        return coord.column if coord is not None and coord.column else 1

    def _unsupported(self, node: c_ast.Node, what: str) -> None:
        self.diagnostics.append(
            error(self._line(node), self._column(node), "UnsupportedConstruct", what)
        )

    def _text(self, node: c_ast.Node) -> str:
        return self.generator.visit(node)

    # function-level

    def _params(self, decl: c_ast.Decl) -> Tuple[str, ...]:
        names: List[str] = []
        args = getattr(decl.type, "args", None)
        for param in args.params if args is not None else []:
            if isinstance(param, c_ast.EllipsisParam):
                self._unsupported(param, f"variadic user function '{self.name}'")
                continue
            name = getattr(param, "name", None)
            if name:
                names.append(name)
                self.locals.add(name)
        return tuple(names)

    def lower(self) -> FunctionBody:
        self._stmt(self.definition.body)
        self._connect(self.frontier, self.exit)
        self.frontier = []
        cfg = Cfg(self.graph, self.entry, self.exit).pruned()
        return FunctionBody(self.name, self.params, cfg, self._line(self.definition))

    def _temp(self) -> str:
        self.temps += 1
        return f"$t{self.temps}"

    # expressions

    def _identifier(self, name: str) -> Operand:
        if name in self.locals:
            return Var(name)
        if name in self.global_names:
            return Var(GLOBAL_PREFIX + name)
        if name in self.defines:
            return Const(self.defines[name])
        return Name(name)

    def _variable(self, node: c_ast.Node) -> Optional[str]:
        """Tracked variable named by an lvalue, if any."""
        node = _strip_casts(node)
        if not isinstance(node, c_ast.ID):
            return None
        operand = self._identifier(node.name)
        return operand.name if isinstance(operand, Var) else None

    def _expr(self, node: Optional[c_ast.Node]) -> Operand:
        if node is None:
            return Opaque()
        if isinstance(node, c_ast.Constant):
            if node.type == "string":
                return Opaque()
            value = integer_literal(node.value)
            return Const(value) if value is not None else Opaque()
        if isinstance(node, c_ast.ID):
            return self._identifier(node.name)
        if isinstance(node, c_ast.Cast):
            return self._expr(node.expr)
        if isinstance(node, c_ast.FuncCall):
            return self._call(node, self._temp())
        if isinstance(node, c_ast.Assignment):
            return self._assignment(node)
        if isinstance(node, c_ast.UnaryOp):
            return self._unary(node)
        if isinstance(node, c_ast.BinaryOp):
            return self._binary(node)
        if isinstance(node, c_ast.TernaryOp):
            return self._ternary(node)
        if isinstance(node, c_ast.ExprList):
            result: Operand = Opaque()
            for item in node.exprs:
                result = self._expr(item)
            return result
        if isinstance(node, c_ast.ArrayRef):
            self._expr(node.name)
            self._expr(node.subscript)
            return Opaque()
        if isinstance(node, c_ast.StructRef):
            self._expr(node.name)
            return Opaque()
        if isinstance(node, c_ast.InitList):
            for item in node.exprs:
                self._expr(item)
            return Opaque()
        if isinstance(node, c_ast.CompoundLiteral):
            self._expr(node.init)
            return Opaque()
        if isinstance(node, c_ast.NamedInitializer):
            return self._expr(node.expr)
        return Opaque()

    def _call(self, node: c_ast.FuncCall, target: Optional[str]) -> Operand:
        args = [self._expr(arg) for arg in (node.args.exprs if node.args else [])]
        callee = _strip_casts(node.name)
        if not isinstance(callee, c_ast.ID):
            self._unsupported(node, "call through a function pointer")
            return Opaque()
        if callee.name in self.locals:
            self._unsupported(node, f"call through the variable '{callee.name}'")
            return Opaque()
        self._emit(
            CfgNode(
                NodeKind.CALL,
                self._line(node),
                self._column(node),
                callee=callee.name,
                args=tuple(args),
                target=target,
            )
        )
        if callee.name in NORETURN_FUNCTIONS:
            self._connect([(source, "halt") for source, _ in self.frontier], self.exit)
            self.frontier = []
            return Opaque()
        return Var(target) if target is not None else Opaque()

    def _value_into(self, node: c_ast.Node, variable: str) -> None:
        """Evaluate ``node`` and store the result in ``variable``."""
        inner = _strip_casts(node)
        if isinstance(inner, c_ast.FuncCall):
            self._call(inner, variable)
            return
        value = self._expr(node)
        self._emit(
            CfgNode(
                NodeKind.ASSIGN,
                self._line(node),
                self._column(node),
                target=variable,
                value=value,
            )
        )

    def _assignment(self, node: c_ast.Assignment) -> Operand:
        variable = self._variable(node.lvalue)
        if variable is None:
            if not isinstance(_strip_casts(node.lvalue), c_ast.ID):
                self._expr(node.lvalue)
            self._expr(node.rvalue)
            return Opaque()
        if node.op == "=":
            self._value_into(node.rvalue, variable)
            return Var(variable)
        self._expr(node.rvalue)
        self._emit(
            CfgNode(
                NodeKind.ASSIGN,
                self._line(node),
                self._column(node),
                target=variable,
                value=Opaque(),
            )
        )
        return Var(variable)

    def _unary(self, node: c_ast.UnaryOp) -> Operand:
        if node.op == "sizeof":
            return Opaque()
        if node.op in _INCREMENTS:
            variable = self._variable(node.expr)
            if variable is None:
                self._expr(node.expr)
            else:
                self._emit(
                    CfgNode(
                        NodeKind.ASSIGN,
                        self._line(node),
                        self._column(node),
                        target=variable,
                        value=Opaque(),
                    )
                )
            return Opaque()
        operand = self._expr(node.expr)
        fold = _UNARY.get(node.op)
        if fold is not None and isinstance(operand, Const):
            return Const(fold(operand.value))
        return Opaque()

    def _binary(self, node: c_ast.BinaryOp) -> Operand:
        if node.op in ("&&", "||") and _has_call(node.right):
            left = self._expr(node.left)
            if isinstance(left, Const):
                decided = (node.op == "&&" and not left.value) or (node.op == "||" and left.value)
                if decided:
                    return Const(int(bool(left.value)))
                right = self._expr(node.right)
                return Const(int(bool(right.value))) if isinstance(right, Const) else Opaque()
            branch = self._emit(
                CfgNode(NodeKind.BRANCH, self._line(node), self._column(node), text=node.op)
            )
            if branch is None:
                return Opaque()
            self.frontier = [(branch, "then")]
            self._expr(node.right)
            self.frontier = self.frontier + [(branch, "else")]
            return Opaque()
        left = self._expr(node.left)
        right = self._expr(node.right)
        fold = _BINARY.get(node.op)
        if isinstance(left, Const) and isinstance(right, Const):
            if fold is not None:
                return Const(fold(left.value, right.value))
            if node.op in ("/", "%") and right.value != 0:
                quotient = int(left.value / right.value)
                if node.op == "/":
                    return Const(quotient)
                return Const(left.value - quotient * right.value)
        return Opaque()

    def _ternary(self, node: c_ast.TernaryOp) -> Operand:
        condition = self._expr(node.cond)
        if isinstance(condition, Const):
            return self._expr(node.iftrue if condition.value else node.iffalse)
        temp = self._temp()
        branch = self._emit(
            CfgNode(
                NodeKind.BRANCH, self._line(node), self._column(node), text=self._text(node.cond)
            )
        )
        if branch is None:
            return Opaque()
        self.frontier = [(branch, "then")]
        self._value_into(node.iftrue, temp)
        then_out = self.frontier
        self.frontier = [(branch, "else")]
        self._value_into(node.iffalse, temp)
        self.frontier = then_out + self.frontier
        return Var(temp)

    def _condition(
        self, node: Optional[c_ast.Node]
    ) -> Tuple[Optional[bool], List[Edge], List[Edge]]:
        """
        Lower a branch condition.

        Returns:
            The folded truth value (None when not constant) and the frontiers
            entering the true and false successors.
        """
        if node is None:
            return True, self.frontier, []
        value = self._expr(node)
        if isinstance(value, Const):
            if value.value:
                return True, self.frontier, []
            return False, [], self.frontier
        branch = self._emit(
            CfgNode(NodeKind.BRANCH, self._line(node), self._column(node), text=self._text(node))
        )
        if branch is None:
            return None, [], []
        return None, [(branch, "then")], [(branch, "else")]

    # statements

    def _stmt(self, node: Optional[c_ast.Node]) -> None:
        if node is None:
            return
        handler = getattr(self, f"_stmt_{type(node).__name__}", None)
        if handler is not None:
            handler(node)
        elif isinstance(
            node,
            (
                c_ast.FuncCall,
                c_ast.Assignment,
                c_ast.UnaryOp,
                c_ast.BinaryOp,
                c_ast.TernaryOp,
                c_ast.ExprList,
                c_ast.Cast,
                c_ast.ID,
                c_ast.Constant,
                c_ast.ArrayRef,
                c_ast.StructRef,
            ),
        ):
            self._expr(node)
        else:
            self._unsupported(node, f"statement kind {type(node).__name__}")

    def _stmt_Compound(self, node: c_ast.Compound) -> None:
        for item in node.block_items or []:
            self._stmt(item)

    def _stmt_Decl(self, node: c_ast.Decl) -> None:
        if isinstance(node.type, c_ast.FuncDecl) or not node.name:
            return
        if "typedef" in (node.storage or []):
            return
        self.locals.add(node.name)
        if node.init is None:
            return
        if isinstance(node.init, c_ast.InitList):
            self._expr(node.init)
            self._emit(
                CfgNode(
                    NodeKind.ASSIGN,
                    self._line(node),
                    self._column(node),
                    target=node.name,
                    value=Opaque(),
                )
            )
            return
        self._value_into(node.init, node.name)

    def _stmt_DeclList(self, node: c_ast.DeclList) -> None:
        for decl in node.decls:
            self._stmt_Decl(decl)

    def _stmt_Typedef(self, node: c_ast.Typedef) -> None:
        return

    def _stmt_EmptyStatement(self, node: c_ast.EmptyStatement) -> None:
        return

    def _stmt_Pragma(self, node: c_ast.Pragma) -> None:
        return

    def _stmt_If(self, node: c_ast.If) -> None:
        _, then_in, else_in = self._condition(node.cond)
        self.frontier = then_in
        self._stmt(node.iftrue)
        then_out = self.frontier
        self.frontier = else_in
        self._stmt(node.iffalse)
        self.frontier = then_out + self.frontier

    def _loop(
        self,
        node: c_ast.Node,
        condition: Optional[c_ast.Node],
        body: Optional[c_ast.Node],
        step: Optional[c_ast.Node],
        test_first: bool,
    ) -> None:
        head = self._emit(CfgNode(NodeKind.JOIN, self._line(node), self._column(node), text="loop"))
        self.breaks.append([])
        self.continues.append([])
        if test_first:
            _, body_in, exits = self._condition(condition)
            self.frontier = body_in
            self._stmt(body)
            self.frontier = self.frontier + self.continues.pop()
            if step is not None:
                self._expr(step)
            if head is not None:
                self._connect(self.frontier, head)
        else:
            self._stmt(body)
            self.frontier = self.frontier + self.continues.pop()
            _, again, exits = self._condition(condition)
            if head is not None:
                self._connect(again, head)
        self.frontier = exits + self.breaks.pop()

    def _stmt_While(self, node: c_ast.While) -> None:
        self._loop(node, node.cond, node.stmt, None, test_first=True)

    def _stmt_DoWhile(self, node: c_ast.DoWhile) -> None:
        self._loop(node, node.cond, node.stmt, None, test_first=False)

    def _stmt_For(self, node: c_ast.For) -> None:
        if isinstance(node.init, c_ast.DeclList):
            self._stmt_DeclList(node.init)
        elif node.init is not None:
            self._expr(node.init)
        self._loop(node, node.cond, node.stmt, node.next, test_first=True)

    def _stmt_Switch(self, node: c_ast.Switch) -> None:
        self._expr(node.cond)
        branch = self._emit(
            CfgNode(
                NodeKind.BRANCH,
                self._line(node),
                self._column(node),
                text=f"switch ({self._text(node.cond)})",
            )
        )
        context = _SwitchContext(branch)
        self.switches.append(context)
        self.breaks.append([])
        self.frontier = []
        self._stmt(node.stmt)
        out = self.frontier
        if branch is not None and not context.has_default:
            out = out + [(branch, "default")]
        self.frontier = out + self.breaks.pop()
        self.switches.pop()

    def _case_label(self, node: c_ast.Case) -> Optional[str]:
        expr = _strip_casts(node.expr)
        if isinstance(expr, c_ast.ID) and expr.name not in self.defines:
            return expr.name
        saved, self.frontier = self.frontier, []
        value = self._expr(node.expr)
        self.frontier = saved
        if isinstance(value, Const):
            return str(value.value)
        self._unsupported(node, "case label is not an integer constant")
        return None

    def _stmt_Case(self, node: c_ast.Case) -> None:
        if not self.switches:
            self._unsupported(node, "case label outside a switch")
            return
        context = self.switches[-1]
        label = self._case_label(node)
        if label is not None and context.branch is not None:
            if label in context.labels:
                self._unsupported(node, f"duplicate case label {label}")
            else:
                context.labels.add(label)
                self.frontier = self.frontier + [(context.branch, f"case:{label}")]
        for stmt in node.stmts or []:
            self._stmt(stmt)

    def _stmt_Default(self, node: c_ast.Default) -> None:
        if not self.switches:
            self._unsupported(node, "default label outside a switch")
            return
        context = self.switches[-1]
        context.has_default = True
        if context.branch is not None:
            self.frontier = self.frontier + [(context.branch, "default")]
        for stmt in node.stmts or []:
            self._stmt(stmt)

    def _stmt_Break(self, node: c_ast.Break) -> None:
        if not self.breaks:
            self._unsupported(node, "break outside a loop or switch")
            return
        self.breaks[-1].extend(self.frontier)
        self.frontier = []

    def _stmt_Continue(self, node: c_ast.Continue) -> None:
        if not self.continues:
            self._unsupported(node, "continue outside a loop")
            return
        self.continues[-1].extend(self.frontier)
        self.frontier = []

    def _stmt_Return(self, node: c_ast.Return) -> None:
        if node.expr is not None:
            self._value_into(node.expr, RETURN_VAR)
        self._connect(self.frontier, self.exit)
        self.frontier = []

    def _stmt_Goto(self, node: c_ast.Goto) -> None:
        self._unsupported(node, "goto")

    def _stmt_Label(self, node: c_ast.Label) -> None:
        self._unsupported(node, f"label '{node.name}'")
        self._stmt(node.stmt)


def _parse_error(exc: ParseError) -> Diagnostic:
    match = _PARSE_ERROR.match(str(exc))
    if match is None:
        return error(1, 1, "SyntaxError", str(exc))
    line, column = int(match.group("line")), int(match.group("col"))
    return error(line, column, "SyntaxError", match.group("msg"))


def _global_value(decl: c_ast.Decl, defines: Dict[str, int]) -> Operand:
    if decl.init is None:
        return Const(0) if isinstance(decl.type, c_ast.TypeDecl) else Opaque()
    init = _strip_casts(decl.init)
    if isinstance(init, c_ast.Constant) and init.type != "string":
        value = integer_literal(init.value)
        return Const(value) if value is not None else Opaque()
    if isinstance(init, c_ast.UnaryOp) and init.op == "-" and isinstance(init.expr, c_ast.Constant):
        value = integer_literal(init.expr.value)
        return Const(-value) if value is not None else Opaque()
    if isinstance(init, c_ast.ID):
        if init.name in defines:
            return Const(defines[init.name])
        return Name(init.name)
    return Opaque()


def parse_program(
    source: str, filename: str = "<input>", entry: str = DEFAULT_ENTRY
) -> ProgramModel:
    """
    Parse a MiniC source into a ProgramModel.

    Args:
        source: C source text.
        filename: Name used in diagnostics and locations.
        entry: Entry function name.

    Returns:
        ProgramModel with one Cfg per function definition.

    Raises:
        ProgramParseError: On syntax errors, unsupported constructs or a
            missing entry function.
    """
    prepared = preprocess(source)
    diagnostics: List[Diagnostic] = list(prepared.diagnostics)
    if any(d.is_error for d in diagnostics):
        raise ProgramParseError(filename, diagnostics)
    text = f'{MINIC_PRELUDE}\n#line 1 "{filename}"\n{prepared.text}'
    try:
        ast = c_parser.CParser().parse(text, filename)
    except ParseError as exc:
        raise ProgramParseError(filename, diagnostics + [_parse_error(exc)]) from exc

    global_values: Dict[str, Operand] = {}
    definitions: List[c_ast.FuncDef] = []
    for ext in ast.ext:
        if isinstance(ext, c_ast.FuncDef):
            definitions.append(ext)
        elif isinstance(ext, c_ast.Decl) and ext.name and not isinstance(ext.type, c_ast.FuncDecl):
            if "extern" in (ext.storage or []):
                continue
            global_values[ext.name] = _global_value(ext, prepared.defines)

    functions: Dict[str, FunctionBody] = {}
    for definition in definitions:
        name = definition.decl.name
        if name in functions:
            coord = definition.coord
            diagnostics.append(
                error(coord.line, coord.column or 1, "SyntaxError", f"redefinition of '{name}'")
            )
            continue
        lowerer = _FunctionLowerer(definition, set(global_values), prepared.defines, diagnostics)
        functions[name] = lowerer.lower()
        logger.debug("lowered %s to %d CFG nodes", name, functions[name].cfg.graph.number_of_nodes())

    if entry not in functions:
        diagnostics.append(error(1, 1, "MissingEntry", f"entry function '{entry}' is not defined"))
    if any(d.is_error for d in diagnostics):
        raise ProgramParseError(filename, diagnostics)
    for diagnostic in diagnostics:
        logger.warning(diagnostic.format(filename))

    return ProgramModel(
        filename=filename,
        entry=entry,
        functions=functions,
        globals=global_values,
        defines=dict(prepared.defines),
        diagnostics=tuple(diagnostics),
    )
