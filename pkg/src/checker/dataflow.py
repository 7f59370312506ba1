"""
Forward must-analysis of completed dependencies.
"""

import logging
from typing import Dict, Hashable, Iterable

from checker.monitor import Keys, MonitorState, completed_key, meet
from frontend.pipeline import AnalyzedProgram
from model.thad import Alias, Thad, ThadSet
from utils.worklist import solve_forward

logger = logging.getLogger(__name__)


def thad_fixpoint(
    program: AnalyzedProgram, thad: Thad, aliases: Iterable[Alias] = ()
) -> Dict[Hashable, Keys]:
    """
    Completed keys on entry to every reachable node, for one THAD.

    A call completing the dependency adds its key; every other node is the
    identity. Nodes missing from the result are unreachable.
    """
    aliases = tuple(aliases)
    cfg = program.model.entry_cfg
    gens = {}
    for node_id, event in program.flow.events.items():
        key = completed_key(thad, event, aliases)
        if key is not None:
            gens[node_id] = key

    def transfer(node_id: Hashable, keys: Keys) -> Keys:
        key = gens.get(node_id)
        return keys | {key} if key is not None else keys

    states = solve_forward(cfg.graph, cfg.entry, frozenset(), transfer, meet)
    logger.debug("%s: %d completing nodes, %d reachable nodes", thad.id, len(gens), len(states))
    return states


def dataflow_fixpoint(program: AnalyzedProgram, thad_set: ThadSet) -> Dict[Hashable, MonitorState]:
    """
    Monitor state of every reachable node for every THAD of the set.

    Args:
        program: Analyzed program (inlined, resolved, with token flow).
        thad_set: THADs to track.

    Returns:
        Mapping from node id to its MonitorState; unreachable nodes are absent.
    """
    per_thad = {t.id: thad_fixpoint(program, t, thad_set.aliases) for t in thad_set.sorted_thads()}
    nodes = set()
    for states in per_thad.values():
        nodes.update(states)
    return {
        node: MonitorState({thad_id: states[node] for thad_id, states in per_thad.items()})
        for node in sorted(nodes)
    }
