"""
Dependency graph of a THAD set: one edge dependency -> dependent per THAD.
"""

import re
from typing import List

import networkx as nx

from model.thad import ThadSet

_DOT_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def dependency_graph(thad_set: ThadSet) -> nx.MultiDiGraph:
    """
    Build the THAD dependency graph.

    Nodes are routine patterns (`ioctl[request=MSG]` and `ioctl` are distinct
    nodes); every THAD contributes one edge keyed and labelled by its id.
    """
    graph = nx.MultiDiGraph()
    for thad in thad_set.sorted_thads():
        graph.add_edge(str(thad.dependency), str(thad.dependent), key=thad.id, label=thad.id)
    return graph


def _dot_id(name: str) -> str:
    if _DOT_ID.fullmatch(name):
        return name
    escaped = name.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def to_dot(graph: nx.MultiDiGraph) -> str:
    lines: List[str] = ["digraph thads {"]
    for source, target, label in graph.edges(data="label"):
        lines.append(f'  {_dot_id(source)} -> {_dot_id(target)} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_text(graph: nx.MultiDiGraph) -> str:
    """Adjacency listing: each dependency followed by its dependents."""
    lines: List[str] = []
    for source in graph.nodes:
        out = [(target, label) for _, target, label in graph.out_edges(source, data="label")]
        if not out:
            continue
        lines.append(f"{source}:")
        lines.extend(f"  -> {target} ({label})" for target, label in out)
    return "\n".join(lines) + "\n" if lines else ""
