"""Variable neighborhood descent over Steiner-node insertion and removal moves."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .graph import (Edge, InfeasibleError, Instance, Solution, connected_components, dijkstra,
                    edge_key, kruskal, tree_from_edges)
from .scores import ScoreTable

SOLUTION_DEGREE = "solution"
GRAPH_DEGREE = "graph"

StopFn = Callable[[], bool]
BoundSink = Callable[[Solution], None]
RoundHook = Callable[[Solution], Optional[Tuple[Instance, Solution]]]


@dataclass(frozen=True)
class VndParams:
    b_min: int = 1
    b_max: int = 256
    max_restarts: int = 5
    combination_cap: int = 50
    walk_cap: Optional[int] = None      # None means 4 * |V|
    walk_attempts: int = 10
    seed: int = 0
    # which degree "delta(i) > 2" refers to when picking start/target nodes
    degree_mode: str = SOLUTION_DEGREE

    def __post_init__(self):
        if not 1 <= self.b_min <= self.b_max:
            raise ValueError("need 1 <= b_min <= b_max")
        if self.combination_cap < 1 or self.walk_attempts < 1 or self.max_restarts < 0:
            raise ValueError("caps must be positive")
        if self.walk_cap is not None and self.walk_cap < 1:
            raise ValueError("walk_cap must be positive")
        if self.degree_mode not in (SOLUTION_DEGREE, GRAPH_DEGREE):
            raise ValueError(f"unknown degree mode {self.degree_mode!r}")


def _never() -> bool:
    return False


def branch_nodes(instance: Instance, sol: Solution, mode: str = SOLUTION_DEGREE) -> Set[int]:
    if mode == GRAPH_DEGREE:
        return {v for v in sol.nodes if instance.graph.degree(v) > 2}
    return {v for v, d in sol.degrees().items() if d > 2}


def random_path(instance: Instance, sol: Solution, start: int, rng: random.Random,
                params: VndParams = VndParams()) -> List[int]:
    """Self-avoiding random walk from ``start`` to another branch node of ``sol``.

    Falls back to any other solution node when ``sol`` has no second branch
    node. Returns ``[]`` when no walk succeeds within the attempt and length caps.
    """
    g = instance.graph
    if start not in g:
        return []
    targets = branch_nodes(instance, sol, params.degree_mode) - {start}
    if not targets:
        targets = set(sol.nodes) - {start}
    if not targets:
        return []
    cap = params.walk_cap or 4 * g.num_nodes
    for _ in range(params.walk_attempts):
        path = [start]
        seen = {start}
        cur = start
        while len(path) <= cap:
            options = sorted(v for v in g.neighbors(cur) if v not in seen)
            if not options:
                break
            cur = rng.choice(options)
            path.append(cur)
            if cur in targets:
                return path
            seen.add(cur)
    return []


def insert_path(sol: Solution, path: Sequence[int], instance: Instance) -> Solution:
    """Add the path's edges to ``sol`` and restore a pruned minimum spanning tree."""
    if len(path) < 2:
        return sol
    new_edges = {edge_key(a, b) for a, b in zip(path, path[1:])}
    if new_edges <= sol.edges.keys():
        return sol
    return tree_from_edges(instance.graph, set(sol.edges) | new_edges, instance.terminals,
                           extra_nodes=sol.nodes)


def start_count(instance: Instance, b: int) -> int:
    n = instance.graph.num_nodes
    return max(1, math.ceil(b * math.log(n) ** 2)) if n > 1 else 1


def insertion_local_search(instance: Instance, sol: Solution, b: int, scores: ScoreTable,
                           rng: random.Random, params: VndParams = VndParams(),
                           stop: StopFn = _never) -> Solution:
    """First-improvement path insertion.

    Paths accumulate in a working copy that may get worse; the copy is
    returned only if it beats ``sol``.
    """
    work = sol
    for _ in range(max(1, params.max_restarts)):
        cand = branch_nodes(instance, sol, params.degree_mode)
        if not cand:
            cand = set(sol.nodes & instance.terminals)
        starts = scores.top_scored(cand, start_count(instance, b))
        work = sol
        for s in starts:
            if stop():
                return work if work.cost < sol.cost else sol
            if s not in work.nodes:
                continue
            path = random_path(instance, work, s, rng, params)
            if not path:
                continue
            before = work.nodes
            work = insert_path(work, path, instance)
            if work.cost < sol.cost:
                scores.reward(work.nodes)
                return work
            scores.penalize(work.nodes - before)
        scores.restart(rng)
    return work if work.cost < sol.cost else sol


def reconnect(instance: Instance, edges: Iterable[Edge], nodes: Iterable[int], rng: random.Random,
              blocked: FrozenSet[int] = frozenset(), reps: int = 3) -> Solution:
    """Join the components of a partial tree through cheapest representative paths.

    Up to ``reps`` random nodes per component run Dijkstra (never entering
    ``blocked``); the cheapest path found between each pair of components
    weighs an edge of the component graph, whose MST paths are added before a
    final MST and leaf pruning.
    """
    g = instance.graph
    edges = {edge_key(u, v) for u, v in edges}
    nodes = set(nodes)
    for u, v in edges:
        nodes.update((u, v))
    comps = connected_components(nodes, edges)
    if len(comps) <= 1:
        return tree_from_edges(g, edges, instance.terminals, extra_nodes=nodes)

    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    links: Dict[Tuple[int, int], Tuple[int, List[int]]] = {}
    for ci, comp in enumerate(comps):
        members = sorted(comp)
        for r in rng.sample(members, min(reps, len(members))):
            first: Dict[int, int] = {}

            def seen(u, ci=ci, first=first):
                cj = comp_of.get(u)
                if cj is not None and cj != ci and cj not in first:
                    first[cj] = u
                return len(first) == len(comps) - 1

            res = dijkstra(g, r, blocked=blocked, stop=seen)
            for cj, u in first.items():
                key = (min(ci, cj), max(ci, cj))
                d = res.dist[u]
                if key not in links or d < links[key][0]:
                    links[key] = (d, res.path_to(u))
    tree = kruskal((i, j, d) for (i, j), (d, _) in links.items())
    if len(tree) < len(comps) - 1:
        raise InfeasibleError("cannot reconnect the solution components")
    union = set(edges)
    for i, j, _ in tree:
        p = links[(i, j)][1]
        union.update(edge_key(a, b) for a, b in zip(p, p[1:]))
    return tree_from_edges(g, union, instance.terminals, extra_nodes=nodes)


def sample_combinations(pool: Sequence[int], size: int, cap: int, rng: random.Random) -> List[Tuple[int, ...]]:
    """Up to ``cap`` distinct ``size``-subsets of ``pool``, drawn uniformly."""
    total = math.comb(len(pool), size)
    if total <= cap:
        out = list(combinations(pool, size))
        rng.shuffle(out)
        return out
    seen: Set[Tuple[int, ...]] = set()
    out = []
    while len(out) < cap:
        c = tuple(sorted(rng.sample(list(pool), size)))
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def removal_local_search(instance: Instance, sol: Solution, b: int, scores: ScoreTable,
                         rng: random.Random, params: VndParams = VndParams(),
                         stop: StopFn = _never) -> Solution:
    terms = instance.terminals
    for _ in range(max(1, params.max_restarts)):
        steiner = sol.nodes - terms
        if len(steiner) < b:
            return sol
        pool = scores.top_scored(steiner, 3 * b)
        for combo in sample_combinations(pool, b, params.combination_cap, rng):
            if stop():
                return sol
            gone = frozenset(combo)
            kept = [e for e in sol.edges if e[0] not in gone and e[1] not in gone]
            comps = [c for c in connected_components(sol.nodes - gone, kept) if c & terms]
            keep_nodes = frozenset().union(*comps)
            kept = [e for e in kept if e[0] in keep_nodes]
            try:
                cand = reconnect(instance, kept, keep_nodes, rng, blocked=gone)
            except InfeasibleError:
                continue
            if cand.cost < sol.cost:
                scores.reward(cand.nodes)
                return cand
            scores.penalize(cand.nodes - keep_nodes)
        scores.restart(rng)
    return sol


def vnd_descent(instance: Instance, start: Solution, params: VndParams, scores: ScoreTable,
                rng: random.Random, bound_sink: Optional[BoundSink] = None,
                stop: StopFn = _never, on_round: Optional[RoundHook] = None) -> Solution:
    """Escalate the neighborhood size from b_min by doubling until it exceeds b_max.

    Any improvement resets the size to b_min. Every new best solution is
    handed to ``bound_sink``. ``on_round`` runs before each round and may swap
    in a reduced instance together with a matching current solution.
    """
    b = params.b_min
    cur = best = start
    while b <= params.b_max and not stop():
        if on_round is not None:
            swapped = on_round(cur)
            if swapped is not None:
                instance, cur = swapped
                if cur.cost < best.cost:
                    best = cur
                    if bound_sink:
                        bound_sink(best)
        nxt = insertion_local_search(instance, cur, b, scores, rng, params, stop)
        if nxt.cost >= cur.cost:
            nxt = removal_local_search(instance, cur, b, scores, rng, params, stop)
        if nxt.cost < cur.cost:
            cur = nxt
            b = params.b_min
            if cur.cost < best.cost:
                best = cur
                if bound_sink:
                    bound_sink(best)
        else:
            b *= 2
    return best
