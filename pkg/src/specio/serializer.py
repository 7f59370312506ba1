"""
Serialization of THAD sets and constants tables back to concrete syntax.
"""

from typing import List, Mapping

from model.thad import BindingSource, Param, ParamRole, RoutinePattern, RoutineSpec, Thad, ThadSet


def _param(param: Param) -> str:
    if param.role is ParamRole.OPAQUE:
        return param.name
    return f"{param.name}:{param.role.value}"


def format_routine(spec: RoutineSpec) -> str:
    params = ", ".join(_param(p) for p in spec.params)
    suffix = " returns descriptor" if spec.returns_descriptor else ""
    return f"routine {spec.name}({params}){suffix}"


def format_pattern(pattern: RoutinePattern) -> str:
    return str(pattern)


def format_dep(thad: Thad) -> str:
    return f"dep {thad.id}: {format_pattern(thad.dependent)} requires {format_pattern(thad.dependency)}"


def format_bind(thad: Thad) -> str:
    binding = thad.binding
    assert binding is not None
    source = "return" if binding.source is BindingSource.RETURN else binding.source_param
    return (
        f"bind {thad.id}: {thad.dependency.routine}.{source} -> "
        f"{thad.dependent.routine}.{binding.target_param}"
    )


def serialize_spec(thad_set: ThadSet) -> str:
    """
    Render a THAD set as a `.thad` document.

    Args:
        thad_set: Valid THAD set.

    Returns:
        Text that parse_thad_spec turns back into an equal set when given
        the same constants table; the empty set renders as "".
    """
    sections: List[List[str]] = [
        [format_routine(r) for r in thad_set.routines],
        [format_dep(t) for t in thad_set.thads],
        [format_bind(t) for t in thad_set.thads if t.binding is not None],
        [f"alias {a.constant} satisfies {a.target}" for a in thad_set.aliases],
    ]
    blocks = ["\n".join(lines) + "\n" for lines in sections if lines]
    return "\n".join(blocks)


def serialize_constants(constants: Mapping[str, int]) -> str:
    return "".join(f"{name} = {value}\n" for name, value in constants.items())
