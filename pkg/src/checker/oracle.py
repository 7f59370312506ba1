"""
Brute-force path oracle.

Enumerates maximal walks of the entry CFG (each node visited at most
``path_bound + 1`` times), replays descriptor tokens concretely along each
walk and applies the trace semantics directly. Walks cut short by the
visit bound are evaluated as prefixes.
"""

import logging
from collections import Counter
from dataclasses import replace
from typing import Dict, Iterator, List, Tuple

from config import PATH_CAP
from errors import PathExplosion
from frontend.cfg import Cfg, NodeKind, Var
from frontend.pipeline import AnalyzedProgram
from frontend.tokens import token_name
from model.semantics import trace_satisfies
from model.thad import CallEvent, ThadSet

logger = logging.getLogger(__name__)


def enumerate_walks(
    cfg: Cfg, path_bound: int = 0, cap: int = PATH_CAP
) -> Iterator[Tuple[int, ...]]:
    """
    Yield every maximal walk from the entry under the visit bound.

    Raises:
        PathExplosion: If more than ``cap`` walks exist.
    """
    limit = path_bound + 1
    visits: Counter = Counter({cfg.entry: 1})
    path: List[int] = [cfg.entry]
    frames = [[iter(cfg.successors(cfg.entry)), False]]
    count = 0
    while frames:
        frame = frames[-1]
        step = next((s for s in frame[0] if visits[s] < limit), None)
        if step is not None:
            frame[1] = True
            visits[step] += 1
            path.append(step)
            frames.append([iter(cfg.successors(step)), False])
            continue
        if not frame[1]:
            count += 1
            if count > cap:
                raise PathExplosion(cap)
            yield tuple(path)
        frames.pop()
        visits[path.pop()] -= 1


def path_events(program: AnalyzedProgram, path: Tuple[int, ...]) -> List[CallEvent]:
    """HAL call events along a walk, with a fresh token for every descriptor produced."""
    cfg = program.model.entry_cfg
    env: Dict[str, str] = {}
    events: List[CallEvent] = []
    fresh = 0
    for node_id in path:
        node = cfg.node(node_id)
        if node.kind is NodeKind.ASSIGN and node.target is not None:
            source = env.get(node.value.name) if isinstance(node.value, Var) else None
            if source is None:
                env.pop(node.target, None)
            else:
                env[node.target] = source
            continue
        if node.kind is not NodeKind.CALL:
            continue
        produced = None
        if node.resolved is not None:
            routine = program.model.routine(node.resolved.routine)
            descriptor = None
            param = routine.descriptor_param if routine is not None else None
            if param is not None:
                index = routine.param_index(param.name)
                operand = node.args[index] if index < len(node.args) else None
                if isinstance(operand, Var):
                    descriptor = env.get(operand.name)
            if routine is not None and routine.returns_descriptor:
                fresh += 1
                produced = f"{token_name(node_id)}#{fresh}"
            events.append(
                replace(node.resolved, descriptor_token=descriptor, produced_token=produced)
            )
        if node.target is not None:
            if produced is None:
                env.pop(node.target, None)
            else:
                env[node.target] = produced
    return events


def brute_force_paths(
    program: AnalyzedProgram, thad_set: ThadSet, path_bound: int = 0, cap: int = PATH_CAP
) -> Dict[str, bool]:
    """
    Exact per-THAD verdicts over all enumerated walks.

    Args:
        program: Analyzed program.
        thad_set: THADs to evaluate.
        path_bound: Extra visits allowed per node (loop unrolling factor).
        cap: Maximum number of walks.

    Returns:
        Mapping from THAD id to True when every walk satisfies it.

    Raises:
        PathExplosion: If the walk count exceeds ``cap``.
    """
    thads = thad_set.sorted_thads()
    result = {thad.id: True for thad in thads}
    walks = 0
    for walk in enumerate_walks(program.model.entry_cfg, path_bound, cap):
        walks += 1
        trace = path_events(program, walk)
        for thad in thads:
            if result[thad.id] and not trace_satisfies(thad, trace, thad_set.aliases):
                result[thad.id] = False
    logger.debug("oracle enumerated %d walks with bound %d", walks, path_bound)
    return result
