"""
Descriptor token flow.

Every call to a routine that returns a descriptor defines a token named
after its node. Tokens travel through assignments (parameter passing and
return values are assignments after inlining); a descriptor argument
resolves to a token only when every path gives the variable that token.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Hashable, Optional, Tuple

from frontend.cfg import Cfg, NodeKind, ProgramModel, Var
from model.thad import CallEvent
from utils.worklist import solve_forward

logger = logging.getLogger(__name__)

Aliases = FrozenSet[Tuple[str, str]]


def token_name(node_id: int) -> str:
    return f"t{node_id}"


@dataclass(frozen=True)
class TokenFlow:
    """
    Attributes:
        definitions: Call node -> token it produces.
        descriptors: HAL call node -> must-alias token of its descriptor
            argument (None when no single token reaches it).
        must_alias: Node -> variable -> token holding on entry to the node.
        events: HAL call node -> its CallEvent with tokens filled in.
    """

    definitions: Dict[int, str] = field(default_factory=dict)
    descriptors: Dict[int, Optional[str]] = field(default_factory=dict)
    must_alias: Dict[int, Dict[str, str]] = field(default_factory=dict)
    events: Dict[int, CallEvent] = field(default_factory=dict)


def _producing_nodes(model: ProgramModel, cfg: Cfg) -> Dict[int, str]:
    definitions: Dict[int, str] = {}
    for node_id in cfg.hal_call_nodes():
        event = cfg.node(node_id).resolved
        routine = model.routine(event.routine) if event is not None else None
        if routine is not None and routine.returns_descriptor:
            definitions[node_id] = token_name(node_id)
    return definitions


def _lookup(facts: Aliases, name: str) -> Optional[str]:
    for variable, token in facts:
        if variable == name:
            return token
    return None


def build_token_flow(model: ProgramModel) -> TokenFlow:
    """
    Compute descriptor tokens for the entry function of a resolved model.

    Args:
        model: Inlined model whose HAL calls carry resolved events.

    Returns:
        TokenFlow over the entry function's Cfg.
    """
    cfg = model.entry_cfg
    definitions = _producing_nodes(model, cfg)

    def transfer(node_id: Hashable, facts: Aliases) -> Aliases:
        node = cfg.node(node_id)
        if node.kind not in (NodeKind.ASSIGN, NodeKind.CALL) or node.target is None:
            return facts
        kept = frozenset(fact for fact in facts if fact[0] != node.target)
        if node.kind is NodeKind.ASSIGN:
            token = _lookup(facts, node.value.name) if isinstance(node.value, Var) else None
        else:
            token = definitions.get(node_id)
        return kept | {(node.target, token)} if token is not None else kept

    in_facts = solve_forward(cfg.graph, cfg.entry, frozenset(), transfer, lambda a, b: a & b)

    descriptors: Dict[int, Optional[str]] = {}
    events: Dict[int, CallEvent] = {}
    for node_id in cfg.hal_call_nodes():
        node = cfg.node(node_id)
        routine = model.routine(node.resolved.routine)
        descriptor: Optional[str] = None
        param = routine.descriptor_param if routine is not None else None
        if param is not None:
            index = routine.param_index(param.name)
            operand = node.args[index] if index < len(node.args) else None
            if isinstance(operand, Var):
                descriptor = _lookup(in_facts.get(node_id, frozenset()), operand.name)
            descriptors[node_id] = descriptor
        events[node_id] = replace(
            node.resolved, descriptor_token=descriptor, produced_token=definitions.get(node_id)
        )

    logger.debug("token flow: %d tokens, %d descriptor uses", len(definitions), len(descriptors))
    return TokenFlow(
        definitions=definitions,
        descriptors=descriptors,
        must_alias={node: dict(facts) for node, facts in in_facts.items()},
        events=events,
    )
