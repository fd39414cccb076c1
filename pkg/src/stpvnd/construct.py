"""Initial solutions from the expanded terminal MST (edge- and vertex-pruning variants)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

from .graph import Edge, Instance, Solution, edge_key, tree_from_edges
from .reduce import Tmst, build_tmst

EDGE_PRUNING = "edge"
VERTEX_PRUNING = "vertex"


@dataclass(frozen=True)
class ExpandedTmst:
    tmst_edges: Tuple[Tuple[int, int, int], ...]
    paths: Tuple[Tuple[int, ...], ...]
    edges: FrozenSet[Edge]
    nodes: FrozenSet[int]


def expand_tmst(instance: Instance, tmst: Optional[Tmst] = None) -> ExpandedTmst:
    if tmst is None:
        tmst = build_tmst(instance)
    paths = tuple(tuple(tmst.paths[(u, v)]) for u, v, _ in tmst.edges)
    edges = set()
    nodes = set(instance.terminals)
    for p in paths:
        nodes.update(p)
        edges.update(edge_key(a, b) for a, b in zip(p, p[1:]))
    return ExpandedTmst(tuple(tmst.edges), paths, frozenset(edges), frozenset(nodes))


def construct(instance: Instance, variant: str = EDGE_PRUNING,
              expanded: Optional[ExpandedTmst] = None) -> Solution:
    """Prune G down to the expanded terminal MST, then take MST and strip Steiner leaves.

    ``"edge"`` keeps only the expansion edges, ``"vertex"`` keeps every edge of
    G induced by the expansion nodes.
    """
    if len(instance.terminals) == 1:
        return Solution({}, instance.terminals, 0)
    if expanded is None:
        expanded = expand_tmst(instance)
    g = instance.graph
    if variant == EDGE_PRUNING:
        kept = expanded.edges
    elif variant == VERTEX_PRUNING:
        keep = expanded.nodes
        kept = [(u, v) for u in sorted(keep) for v in g.neighbors(u) if u < v and v in keep]
    else:
        raise ValueError(f"unknown construction variant {variant!r}")
    return tree_from_edges(g, kept, instance.terminals)


def initial_solution(instance: Instance) -> Solution:
    expanded = None if len(instance.terminals) == 1 else expand_tmst(instance)
    by_edges = construct(instance, EDGE_PRUNING, expanded)
    by_nodes = construct(instance, VERTEX_PRUNING, expanded)
    return by_nodes if by_nodes.cost < by_edges.cost else by_edges
