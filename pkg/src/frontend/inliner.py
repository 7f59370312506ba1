"""
Interprocedural inlining from the entry function.

Every call to a user-defined function is replaced by a renamed copy of the
callee's graph: arguments become assignments to the callee's parameters,
the callee's entry and exit become joins, and the return value is copied
into the caller's target. HAL routines are never inlined, even when the
program defines a function of the same name.
"""

import logging
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx

from config import DEFAULT_INLINE_DEPTH
from errors import DepthLimitExceeded, RecursionDetected
from frontend.cfg import (
    GLOBAL_PREFIX,
    RETURN_VAR,
    Cfg,
    CfgNode,
    FunctionBody,
    NodeKind,
    Opaque,
    Operand,
    ProgramModel,
    Var,
)

logger = logging.getLogger(__name__)

_Rename = Callable[[Optional[str]], Optional[str]]
_RenameOperand = Callable[[Optional[Operand]], Optional[Operand]]


def call_graph(model: ProgramModel, hal_routines: Iterable[str] = ()) -> nx.DiGraph:
    """Graph of user functions, with an edge for every call between them."""
    hal = frozenset(hal_routines)
    graph = nx.DiGraph()
    for name, body in model.functions.items():
        if name in hal:
            continue
        graph.add_node(name)
        for node_id in body.cfg.call_nodes():
            callee = body.cfg.node(node_id).callee
            if callee in model.functions and callee not in hal:
                graph.add_edge(name, callee)
    return graph


def _check_call_structure(graph: nx.DiGraph, entry: str, depth_limit: int) -> None:
    reachable = graph.subgraph(nx.descendants(graph, entry) | {entry})
    try:
        cycle = nx.find_cycle(reachable, source=entry)
    except nx.NetworkXNoCycle:
        cycle = []
    if cycle:
        names = [edge[0] for edge in cycle] + [cycle[-1][1]]
        raise RecursionDetected(names)

    longest: Dict[str, List[str]] = {}
    for name in reversed(list(nx.topological_sort(reachable))):
        chains = [longest[callee] for callee in sorted(reachable.successors(name))]
        best = max(chains, key=len, default=[])
        longest[name] = [name] + best
    chain = longest[entry]
    if len(chain) - 1 > depth_limit:
        raise DepthLimitExceeded(chain, depth_limit)


class _Splicer:
    """Copies function graphs into one graph, inlining calls recursively."""

    def __init__(self, model: ProgramModel, hal: FrozenSet[str]):
        self.model = model
        self.hal = hal
        self.graph = nx.DiGraph()
        self.instances = 0
        self.halts: List[int] = []

    def _add(self, payload: CfgNode) -> int:
        node_id = self.graph.number_of_nodes()
        self.graph.add_node(node_id, node=payload)
        return node_id

    def _inlinable(self, node: CfgNode) -> bool:
        return (
            node.kind is NodeKind.CALL
            and node.callee in self.model.functions
            and node.callee not in self.hal
        )

    @staticmethod
    def _renamer(
        prefix: str,
    ) -> Tuple[_Rename, _RenameOperand]:
        def rename(name: Optional[str]) -> Optional[str]:
            if name is None or not prefix or name.startswith(GLOBAL_PREFIX):
                return name
            return prefix + name

        def rename_operand(operand: Optional[Operand]) -> Optional[Operand]:
            if isinstance(operand, Var):
                return Var(rename(operand.name))
            return operand

        return rename, rename_operand

    def copy(self, body: FunctionBody, prefix: str, outermost: bool) -> Tuple[int, int]:
        """
        Copy ``body`` with locals renamed by ``prefix``.

        Returns:
            Ids of the copied entry and exit nodes.
        """
        rename, rename_operand = self._renamer(prefix)
        cfg = body.cfg
        spans: Dict[int, Tuple[int, int]] = {}
        for node_id in cfg.nodes():
            node = cfg.node(node_id)
            args = tuple(rename_operand(a) for a in node.args)
            if self._inlinable(node):
                spans[node_id] = self._inline_call(node, args, rename(node.target))
                continue
            kind = node.kind
            if not outermost and kind in (NodeKind.ENTRY, NodeKind.EXIT):
                kind = NodeKind.JOIN
            payload = CfgNode(
                kind,
                node.line,
                node.column,
                callee=node.callee,
                args=args,
                target=rename(node.target),
                value=rename_operand(node.value),
                text=node.text,
                resolved=node.resolved,
                discriminator_unknown=node.discriminator_unknown,
            )
            copied = self._add(payload)
            spans[node_id] = (copied, copied)

        for source, target, data in cfg.graph.edges(data=True):
            label = data.get("label")
            if label == "halt" and not outermost:
                # a no-return call inside a callee ends the whole program
                self.halts.append(spans[source][1])
                continue
            attrs = {"label": label} if label is not None else {}
            self.graph.add_edge(spans[source][1], spans[target][0], **attrs)
        return spans[cfg.entry][0], spans[cfg.exit][1]

    def _inline_call(
        self, node: CfgNode, args: Tuple[Operand, ...], target: Optional[str]
    ) -> Tuple[int, int]:
        callee = self.model.functions[node.callee or ""]
        self.instances += 1
        prefix = f"{callee.name}#{self.instances}."
        first = last = self._add(
            CfgNode(NodeKind.JOIN, node.line, node.column, text=f"call {callee.name}")
        )
        for index, param in enumerate(callee.params):
            value = args[index] if index < len(args) else Opaque()
            assign = self._add(
                CfgNode(NodeKind.ASSIGN, node.line, node.column, target=prefix + param, value=value)
            )
            self.graph.add_edge(last, assign)
            last = assign
        entry, exit_ = self.copy(callee, prefix, outermost=False)
        self.graph.add_edge(last, entry)
        last = exit_
        if target is not None:
            result = self._add(
                CfgNode(
                    NodeKind.ASSIGN,
                    node.line,
                    node.column,
                    target=target,
                    value=Var(prefix + RETURN_VAR),
                )
            )
            self.graph.add_edge(last, result)
            last = result
        logger.debug("inlined %s at line %d", callee.name, node.line)
        return first, last


def inline_calls(
    model: ProgramModel,
    depth_limit: int = DEFAULT_INLINE_DEPTH,
    hal_routines: Iterable[str] = (),
) -> ProgramModel:
    """
    Inline every user function reachable from the entry function.

    Args:
        model: Parsed program.
        depth_limit: Maximum call-chain depth below the entry function.
        hal_routines: Names of HAL routines; they are never inlined.

    Returns:
        A model whose only function is the inlined entry function.

    Raises:
        RecursionDetected: If user functions reachable from entry are recursive.
        DepthLimitExceeded: If a call chain is deeper than ``depth_limit``.
    """
    if depth_limit < 1:
        raise ValueError("depth_limit must be positive")
    hal = frozenset(hal_routines) | frozenset(r.name for r in model.routines)
    for name in sorted(hal & set(model.functions)):
        logger.warning(
            "%s: '%s' is a HAL routine; the program's definition is not inlined",
            model.filename,
            name,
        )
    if model.entry in hal:
        raise ValueError(f"entry function '{model.entry}' is a HAL routine")

    _check_call_structure(call_graph(model, hal), model.entry, depth_limit)

    splicer = _Splicer(model, hal)
    entry_body = model.functions[model.entry]
    entry, exit_ = splicer.copy(entry_body, "", outermost=True)
    for source in splicer.halts:
        splicer.graph.add_edge(source, exit_, label="halt")
    cfg = Cfg(splicer.graph, entry, exit_).pruned()
    logger.debug(
        "inlined %d call(s) into %s: %d nodes",
        splicer.instances,
        model.entry,
        cfg.graph.number_of_nodes(),
    )
    inlined = FunctionBody(entry_body.name, entry_body.params, cfg, entry_body.line)
    return model.with_functions({model.entry: inlined})
