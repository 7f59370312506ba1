"""
Control-flow graph types for MiniC functions.

A Cfg wraps a networkx DiGraph whose nodes are integers carrying a CfgNode
under the ``node`` attribute; edges may carry a ``label`` (then, else,
case:<value>, default, halt).
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

import networkx as nx

from errors import Diagnostic
from model.thad import CallEvent, RoutineSpec

# Variable holding a function's return value.
RETURN_VAR = "$ret"
# Globals are renamed with this prefix so inlined locals never capture them.
GLOBAL_PREFIX = "::"


class NodeKind(str, Enum):
    ENTRY = "entry"
    EXIT = "exit"
    CALL = "call"
    ASSIGN = "assign"
    BRANCH = "branch"
    JOIN = "join"


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Name:
    """An identifier that is neither a variable nor a `#define`."""

    name: str


@dataclass(frozen=True)
class Opaque:
    """A value the frontend does not track."""


Operand = Union[Const, Var, Name, Opaque]


@dataclass(frozen=True)
class CfgNode:
    kind: NodeKind
    line: int = 0
    column: int = 0
    callee: Optional[str] = None
    args: Tuple[Operand, ...] = ()
    target: Optional[str] = None
    value: Optional[Operand] = None
    text: str = ""
    resolved: Optional[CallEvent] = None
    discriminator_unknown: bool = False


class Cfg:
    """Control-flow graph of one function with designated entry and exit nodes."""

    def __init__(self, graph: nx.DiGraph, entry: int, exit: int):
        self.graph = graph
        self.entry = entry
        self.exit = exit

    def node(self, node_id: int) -> CfgNode:
        return self.graph.nodes[node_id]["node"]

    def label(self, source: int, target: int) -> Optional[str]:
        return self.graph.edges[source, target].get("label")

    def nodes(self) -> List[int]:
        return sorted(self.graph.nodes)

    def successors(self, node_id: int) -> List[int]:
        return sorted(self.graph.successors(node_id))

    def call_nodes(self) -> List[int]:
        return [n for n in self.nodes() if self.node(n).kind is NodeKind.CALL]

    def hal_call_nodes(self) -> List[int]:
        return [n for n in self.call_nodes() if self.node(n).resolved is not None]

    def reachable(self) -> FrozenSet[int]:
        return frozenset(nx.descendants(self.graph, self.entry) | {self.entry})

    def with_nodes(self, updates: Mapping[int, CfgNode]) -> "Cfg":
        """Copy of this graph with some node payloads replaced."""
        graph = self.graph.copy()
        for node_id, payload in updates.items():
            graph.nodes[node_id]["node"] = payload
        return Cfg(graph, self.entry, self.exit)

    def pruned(self) -> "Cfg":
        """Drop nodes unreachable from entry; the exit node is always kept."""
        keep = self.reachable() | {self.exit}
        return Cfg(self.graph.subgraph(keep).copy(), self.entry, self.exit)

    def is_loop_free(self) -> bool:
        return nx.is_directed_acyclic_graph(self.graph)

    def well_formedness_errors(self) -> List[str]:
        """Structural problems of the graph; empty when well formed."""
        problems: List[str] = []
        reachable = self.reachable()
        for node_id in self.nodes():
            payload = self.node(node_id)
            if node_id not in reachable and node_id != self.exit:
                problems.append(f"node {node_id} is unreachable")
            out_labels = [self.label(node_id, s) for s in self.successors(node_id)]
            if node_id == self.exit and out_labels:
                problems.append("exit node has successors")
            if payload.kind is NodeKind.BRANCH:
                if any(label is None for label in out_labels):
                    problems.append(f"branch {node_id} has an unlabeled edge")
                elif sorted(out_labels) != sorted(set(out_labels)):
                    problems.append(f"branch {node_id} repeats an edge label")
                elif not (
                    sorted(out_labels) == ["else", "then"]
                    or (
                        "default" in out_labels
                        and all(lb == "default" or lb.startswith("case:") for lb in out_labels)
                    )
                ):
                    problems.append(f"branch {node_id} has labels {sorted(out_labels)}")
            elif payload.kind is NodeKind.CALL:
                if any(label not in (None, "halt") for label in out_labels):
                    problems.append(f"call {node_id} has a branch label")
            elif any(label is not None for label in out_labels):
                problems.append(f"{payload.kind.value} node {node_id} has a labeled edge")
            if payload.resolved is not None and payload.kind is not NodeKind.CALL:
                problems.append(f"node {node_id} carries a call event but is not a call")
        return problems


@dataclass(frozen=True)
class FunctionBody:
    name: str
    params: Tuple[str, ...]
    cfg: Cfg
    line: int = 0


@dataclass(frozen=True)
class ProgramModel:
    """
    A parsed MiniC program.

    Attributes:
        filename: Source file name used in locations.
        entry: Name of the entry function.
        functions: Function bodies by name.
        globals: Initial values of global variables (unprefixed names).
        defines: Integer `#define` constants.
        routines: HAL routines, known once discriminators are resolved.
        diagnostics: Warnings collected while parsing.
    """

    filename: str
    entry: str
    functions: Dict[str, FunctionBody]
    globals: Dict[str, Operand] = field(default_factory=dict)
    defines: Dict[str, int] = field(default_factory=dict)
    routines: Tuple[RoutineSpec, ...] = ()
    diagnostics: Tuple[Diagnostic, ...] = ()

    @property
    def entry_cfg(self) -> Cfg:
        return self.functions[self.entry].cfg

    def routine(self, name: str) -> Optional[RoutineSpec]:
        for spec in self.routines:
            if spec.name == name:
                return spec
        return None

    def with_functions(self, functions: Dict[str, FunctionBody], **changes) -> "ProgramModel":
        return replace(self, functions=functions, **changes)
