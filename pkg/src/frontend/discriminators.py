"""
Resolution of discriminator arguments to constant names.

Values reach a call site through integer literals, integer `#define`s,
identifiers named like a constant, and copies between variables. The
analysis is a must-constant propagation: a variable holds a value at a
point only when every path assigns it that value.
"""

import logging
from dataclasses import replace
from typing import Callable, Dict, FrozenSet, Hashable, List, Mapping, Optional, Sequence, Tuple

from config import CONSTANT_PREFIXES
from frontend.cfg import (
    GLOBAL_PREFIX,
    Cfg,
    CfgNode,
    Const,
    FunctionBody,
    Name,
    NodeKind,
    Operand,
    ProgramModel,
    Var,
)
from model.thad import CallEvent, RoutineSpec
from utils.helpers import natural_key
from utils.worklist import solve_forward

logger = logging.getLogger(__name__)

Facts = FrozenSet[Tuple[str, Operand]]


def _lookup(facts: Facts, name: str) -> Optional[Operand]:
    for variable, value in facts:
        if variable == name:
            return value
    return None


def evaluate(operand: Optional[Operand], facts: Facts) -> Optional[Operand]:
    """Constant value (Const or Name) of an operand under the given facts."""
    if isinstance(operand, (Const, Name)):
        return operand
    if isinstance(operand, Var):
        return _lookup(facts, operand.name)
    return None


def _without(facts: Facts, name: Optional[str]) -> Facts:
    if name is None:
        return facts
    return frozenset(fact for fact in facts if fact[0] != name)


def _transfer(cfg: Cfg) -> Callable[[Hashable, Facts], Facts]:
    def transfer(node_id: Hashable, facts: Facts) -> Facts:
        node = cfg.node(node_id)
        if node.kind is NodeKind.ASSIGN:
            value = evaluate(node.value, facts)
            facts = _without(facts, node.target)
            return facts | {(node.target, value)} if value is not None else facts
        if node.kind is NodeKind.CALL:
            return _without(facts, node.target)
        return facts

    return transfer


def constant_facts(cfg: Cfg, initial: Facts = frozenset()) -> Dict[Hashable, Facts]:
    """Must-constant facts holding on entry to every reachable node."""
    return solve_forward(cfg.graph, cfg.entry, initial, _transfer(cfg), lambda a, b: a & b)


def constant_names(value: Optional[Operand], constants: Mapping[str, int]) -> List[str]:
    """
    Constant names denoting a resolved value.

    Args:
        value: Const or Name operand (anything else is unresolved).
        constants: Constants table.

    Returns:
        Matching names in natural order; empty when none matches.
    """
    if isinstance(value, Const):
        return sorted((n for n, v in constants.items() if v == value.value), key=natural_key)
    if isinstance(value, Name):
        candidates = [value.name] + [
            value.name[len(prefix) :]
            for prefix in CONSTANT_PREFIXES
            if value.name.startswith(prefix)
        ]
        return [name for name in candidates if name in constants][:1]
    return []


def _global_facts(model: ProgramModel) -> Facts:
    return frozenset(
        (GLOBAL_PREFIX + name, value)
        for name, value in model.globals.items()
        if isinstance(value, (Const, Name))
    )


def _resolve_call(
    node: CfgNode, facts: Facts, routine: RoutineSpec, constants: Mapping[str, int], filename: str
) -> CfgNode:
    discriminator = routine.discriminator_param
    if discriminator is None:
        return _with_event(node, CallEvent(routine.name), unknown=False)

    index = routine.param_index(discriminator.name)
    operand = node.args[index] if index < len(node.args) else None
    value = evaluate(operand, facts)
    names = constant_names(value, constants)
    if names:
        if len(names) > 1:
            logger.debug("%s:%d: value shared by %s, using %s", filename, node.line, names, names[0])
        return _with_event(node, CallEvent(routine.name, names[0]), unknown=False)
    if isinstance(value, Const):
        logger.debug("%s:%d: %d is not in the constants table", filename, node.line, value.value)
        return _with_event(node, CallEvent(routine.name), unknown=False)
    logger.warning(
        "%s:%d: unresolved %s argument of %s", filename, node.line, discriminator.name, routine.name
    )
    return _with_event(node, CallEvent(routine.name), unknown=True)


def _with_event(node: CfgNode, event: CallEvent, unknown: bool) -> CfgNode:
    return replace(node, resolved=event, discriminator_unknown=unknown)


def _resolve_function(
    body: FunctionBody,
    initial: Facts,
    constants: Mapping[str, int],
    routines: Mapping[str, RoutineSpec],
    filename: str,
) -> FunctionBody:
    facts = constant_facts(body.cfg, initial)
    updates: Dict[int, CfgNode] = {}
    for node_id in body.cfg.call_nodes():
        node = body.cfg.node(node_id)
        routine = routines.get(node.callee or "")
        if routine is None:
            continue
        in_facts = facts.get(node_id, frozenset())
        updates[node_id] = _resolve_call(node, in_facts, routine, constants, filename)
    return FunctionBody(body.name, body.params, body.cfg.with_nodes(updates), body.line)


def resolve_discriminators(
    model: ProgramModel, constants: Mapping[str, int], routines: Sequence[RoutineSpec]
) -> ProgramModel:
    """
    Attach a CallEvent to every HAL call node.

    Args:
        model: Parsed (optionally inlined) program.
        constants: Constants table mapping names to integers.
        routines: HAL routines; calls to other functions stay unresolved.

    Returns:
        A new ProgramModel whose HAL call nodes carry resolved events;
        unresolvable discriminators are flagged ``discriminator_unknown``.
    """
    by_name = {r.name: r for r in routines}
    initial_entry = _global_facts(model)
    functions = {
        name: _resolve_function(
            body,
            initial_entry if name == model.entry else frozenset(),
            constants,
            by_name,
            model.filename,
        )
        for name, body in model.functions.items()
    }
    return model.with_functions(functions, routines=tuple(routines))
