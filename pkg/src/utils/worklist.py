"""
Generic forward dataflow solver over networkx control-flow graphs.

States are plain values compared with ``==``; a node missing from the
result is unreachable (the lattice top, identity of the meet).
"""

import heapq
import logging
from typing import Callable, Dict, Hashable, List, TypeVar

import networkx as nx

logger = logging.getLogger(__name__)

State = TypeVar("State")


def reverse_postorder(graph: nx.DiGraph, entry: Hashable) -> List[Hashable]:
    """Nodes reachable from ``entry`` in reverse postorder."""
    return list(reversed(list(nx.dfs_postorder_nodes(graph, entry))))


def solve_forward(
    graph: nx.DiGraph,
    entry: Hashable,
    init: State,
    transfer: Callable[[Hashable, State], State],
    meet: Callable[[State, State], State],
) -> Dict[Hashable, State]:
    """
    Compute the greatest fixpoint of a forward problem with a descending meet.

    Args:
        graph: Control-flow graph.
        entry: Entry node; its in-state is ``init``.
        init: State holding at the entry.
        transfer: Monotone function giving a node's out-state from its in-state.
        meet: Combination of states at join points.

    Returns:
        Mapping from each reachable node to its in-state.
    """
    order = reverse_postorder(graph, entry)
    rank = {node: index for index, node in enumerate(order)}
    in_states: Dict[Hashable, State] = {entry: init}
    out_states: Dict[Hashable, State] = {}
    queue: List[int] = [rank[entry]]
    queued = {entry}
    visits = 0

    while queue:
        node = order[heapq.heappop(queue)]
        queued.discard(node)
        visits += 1

        out = transfer(node, in_states[node])
        if node in out_states and out_states[node] == out:
            continue
        out_states[node] = out

        for succ in graph.successors(node):
            old = in_states.get(succ)
            merged = out if old is None else meet(old, out)
            if old is None or merged != old:
                in_states[succ] = merged
                if succ not in queued:
                    queued.add(succ)
                    heapq.heappush(queue, rank[succ])

    logger.debug("fixpoint reached after %d node visits over %d nodes", visits, len(order))
    return in_states
