"""Exact Steiner trees for small terminal sets (Dreyfus-Wagner subset DP)."""

from __future__ import annotations

import heapq
from typing import Dict, List, Tuple

from .graph import InfeasibleError, Instance, Solution, edge_key, tree_from_edges

MAX_TERMINALS = 12


class TooManyTerminals(ValueError):
    pass


def exact_steiner(instance: Instance, max_terminals: int = MAX_TERMINALS) -> Tuple[int, Solution]:
    """Return ``(optimal cost, optimal tree)``.

    ``cost[mask][v]`` is the cheapest tree spanning the terminals in ``mask``
    plus node ``v``. Each mask is filled by merging two complementary
    sub-masks at ``v`` and then growing along graph edges with Dijkstra.
    Tree recovery walks the stored merge/grow links.
    """
    g = instance.graph
    terms = sorted(instance.terminals)
    if len(terms) > max_terminals:
        raise TooManyTerminals(f"{len(terms)} terminals exceed the exact-solver limit of {max_terminals}")
    root, rest = terms[0], terms[1:]
    if not rest:
        return 0, Solution({}, frozenset([root]), 0)

    k = len(rest)
    full = (1 << k) - 1
    inf = float("inf")
    cost: List[Dict[int, float]] = [dict() for _ in range(full + 1)]
    # link[mask][v] = ("grow", u) | ("merge", sub) | ("leaf",)
    link: List[Dict[int, tuple]] = [dict() for _ in range(full + 1)]

    for mask in range(1, full + 1):
        cm = cost[mask]
        lm = link[mask]
        if mask & (mask - 1) == 0:
            t = rest[mask.bit_length() - 1]
            cm[t] = 0
            lm[t] = ("leaf",)
        else:
            low = mask & -mask
            sub = (mask - 1) & mask
            while sub:
                # each unordered split once: the half holding the lowest bit
                if sub & low:
                    a, b = cost[sub], cost[mask ^ sub]
                    for v, ca in a.items():
                        cb = b.get(v)
                        if cb is None:
                            continue
                        val = ca + cb
                        if val < cm.get(v, inf):
                            cm[v] = val
                            lm[v] = ("merge", sub)
                sub = (sub - 1) & mask
        _grow(g, cm, lm)

    best = cost[full].get(root)
    if best is None:
        raise InfeasibleError("terminals are not connected")

    edges: set = set()
    stack = [(full, root)]
    while stack:
        mask, v = stack.pop()
        kind = link[mask][v]
        if kind[0] == "grow":
            u = kind[1]
            edges.add(edge_key(u, v))
            stack.append((mask, u))
        elif kind[0] == "merge":
            sub = kind[1]
            stack.append((sub, v))
            stack.append((mask ^ sub, v))
    sol = tree_from_edges(g, edges, instance.terminals, extra_nodes=[root])
    assert sol.cost <= best
    return int(best), sol


def _grow(g, cm: Dict[int, float], lm: Dict[int, tuple]) -> None:
    heap = [(c, v) for v, c in cm.items()]
    heapq.heapify(heap)
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done or d > cm[u]:
            continue
        done.add(u)
        for v, c in g.neighbors(u).items():
            nd = d + c
            if nd < cm.get(v, float("inf")):
                cm[v] = nd
                lm[v] = ("grow", u)
                heapq.heappush(heap, (nd, v))
