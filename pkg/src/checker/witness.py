"""
Witness traces for violated THADs.

A witness is a shortest CFG path from the entry to the offending call that
avoids every call completing the relevant key; among shortest paths the
one taking the lowest source line at each divergence is chosen.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Tuple

import networkx as nx

from checker.monitor import STAR, completed_key
from frontend.pipeline import AnalyzedProgram
from model.thad import Alias, CallEvent, Thad


@dataclass(frozen=True)
class WitnessEvent:
    node: int
    line: int
    column: int
    event: CallEvent


@dataclass(frozen=True)
class WitnessTrace:
    """HAL call events along one CFG path, ending at the offending call."""

    thad_id: str
    path: Tuple[int, ...]
    events: Tuple[WitnessEvent, ...]

    @property
    def trace(self) -> Tuple[CallEvent, ...]:
        return tuple(e.event for e in self.events)


def _blocking_nodes(
    program: AnalyzedProgram, thad: Thad, key: str, aliases: Tuple[Alias, ...]
) -> FrozenSet[int]:
    return frozenset(
        node_id
        for node_id, event in program.flow.events.items()
        if completed_key(thad, event, aliases) == key
    )


def find_witness(
    program: AnalyzedProgram, thad: Thad, offending: int, aliases: Iterable[Alias] = ()
) -> WitnessTrace:
    """
    Build the witness trace ending at ``offending``.

    Args:
        program: Analyzed program.
        thad: Violated THAD.
        offending: Node id of a dependent call whose key is not completed.
        aliases: Constant aliases of the set.

    Returns:
        WitnessTrace projected to HAL call events.

    Raises:
        ValueError: If no such path exists (the node is not a violation).
    """
    aliases = tuple(aliases)
    cfg = program.model.entry_cfg
    events = program.flow.events
    if thad.binding is None:
        key = STAR
    else:
        key = events[offending].descriptor_token or ""
    blocked = _blocking_nodes(program, thad, key, aliases) - {offending}
    graph = cfg.graph.subgraph(n for n in cfg.graph.nodes if n not in blocked)
    if cfg.entry not in graph or offending not in graph:
        raise ValueError(f"node {offending} does not violate {thad.id}")

    to_target: Dict[int, int] = nx.single_source_shortest_path_length(
        nx.reverse_view(graph), offending
    )
    if cfg.entry not in to_target:
        raise ValueError(f"node {offending} does not violate {thad.id}")

    path: List[int] = [cfg.entry]
    while path[-1] != offending:
        current = path[-1]
        remaining = to_target[current]
        candidates = [
            succ for succ in graph.successors(current) if to_target.get(succ) == remaining - 1
        ]
        path.append(min(candidates, key=lambda n: (cfg.node(n).line, cfg.node(n).column, n)))

    trace = tuple(
        WitnessEvent(node_id, cfg.node(node_id).line, cfg.node(node_id).column, events[node_id])
        for node_id in path
        if node_id in events
    )
    return WitnessTrace(thad.id, tuple(path), trace)
