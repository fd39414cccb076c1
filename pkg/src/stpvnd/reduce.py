"""Reduction tests for the Steiner problem in graphs.

General tests (degree, triangle, special distance) keep the optimum of the
instance; bound-based tests (reachability, Voronoi) drop nodes that cannot lie
in any tree cheaper than or equal to a known upper bound. Every test only
removes nodes or edges, so a tree of the reduced graph is also a tree of the
original one.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .graph import Edge, InfeasibleError, Instance, PathResult, dijkstra, kruskal

DEGREE = "degree"
TRIANGLE = "triangle"
SPECIAL_DISTANCE = "special_distance"
REACHABILITY = "reachability"
VORONOI = "voronoi"

GENERAL_TESTS = (DEGREE, TRIANGLE, SPECIAL_DISTANCE)
BOUND_TESTS = (REACHABILITY, VORONOI)
ALL_TESTS = GENERAL_TESTS + BOUND_TESTS

DEFAULT_SD_CAP = 10
# settled-node budget for the direct-path part of the special distance test;
# an exhausted search falls back to the edge cost, which only over-estimates
SD_SEARCH_BUDGET = 2000


@dataclass(frozen=True)
class ReductionEvent:
    kind: str                 # "node" or "edge"
    subject: Tuple[int, ...]
    test: str
    bound: Optional[int] = None


class ReductionLog(List[ReductionEvent]):

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "subject", "test", "bound"])
        for ev in self:
            w.writerow([ev.kind, "-".join(map(str, ev.subject)), ev.test,
                        "" if ev.bound is None else ev.bound])
        return buf.getvalue()

    def summary(self) -> Dict[str, int]:
        out = {t: 0 for t in ALL_TESTS}
        for ev in self:
            out[ev.test] = out.get(ev.test, 0) + 1
        out["nodes_removed"] = sum(1 for ev in self if ev.kind == "node")
        out["edges_removed"] = sum(1 for ev in self if ev.kind == "edge")
        return out


def apply_events(instance: Instance, events: Iterable[ReductionEvent]) -> Instance:
    nodes, edges = [], []
    for ev in events:
        if ev.kind == "node":
            if ev.subject[0] in instance.terminals:
                raise ValueError(f"refusing to remove terminal {ev.subject[0]}")
            nodes.append(ev.subject[0])
        else:
            edges.append(ev.subject)
    g = instance.graph.without_edges(edges).without_nodes(nodes)
    return instance.with_graph(g)


def terminal_distances(instance: Instance) -> Dict[int, PathResult]:
    return {t: dijkstra(instance.graph, t) for t in sorted(instance.terminals)}


# --- degree ---------------------------------------------------------------

def reduce_degree(instance: Instance) -> List[ReductionEvent]:
    """Remove non-terminals of degree 0 or 1, cascading to a fixpoint."""
    g = instance.graph
    terms = instance.terminals
    deg = {v: g.degree(v) for v in g.nodes}
    gone = set()
    stack = sorted((v for v, d in deg.items() if d <= 1 and v not in terms), reverse=True)
    events = []
    while stack:
        v = stack.pop()
        if v in gone:
            continue
        gone.add(v)
        events.append(ReductionEvent("node", (v,), DEGREE))
        for u in g.neighbors(v):
            if u in gone:
                continue
            deg[u] -= 1
            if deg[u] <= 1 and u not in terms:
                stack.append(u)
    return events


# --- terminal MST ---------------------------------------------------------

@dataclass
class Tmst:
    """MST of the terminal distance graph with each edge's shortest path in G."""

    edges: List[Tuple[int, int, int]]
    paths: Dict[Edge, List[int]]
    dists: Dict[int, PathResult] = field(repr=False)

    @property
    def max_cost(self) -> Optional[int]:
        return max((c for _, _, c in self.edges), default=None)

    @property
    def cost(self) -> int:
        return sum(c for _, _, c in self.edges)

    def bottlenecks(self) -> Dict[int, Dict[int, int]]:
        """Largest edge cost on the tree path between every pair of terminals."""
        adj: Dict[int, List[Tuple[int, int]]] = {t: [] for t in self.dists}
        for u, v, c in self.edges:
            adj[u].append((v, c))
            adj[v].append((u, c))
        table = {}
        for root in adj:
            best = {root: 0}
            stack = [root]
            while stack:
                u = stack.pop()
                for v, c in adj[u]:
                    if v not in best:
                        best[v] = max(best[u], c)
                        stack.append(v)
            table[root] = best
        return table


def build_tmst(instance: Instance, dists: Optional[Dict[int, PathResult]] = None) -> Tmst:
    if dists is None:
        dists = terminal_distances(instance)
    terms = sorted(instance.terminals)
    pairs = []
    for a_i, a in enumerate(terms):
        da = dists[a].dist
        for b in terms[a_i + 1:]:
            if b not in da:
                raise InfeasibleError(f"terminals {a} and {b} are not connected")
            pairs.append((a, b, da[b]))
    tree = kruskal(pairs)
    paths = {(u, v): dists[u].path_to(v) for u, v, _ in tree}
    return Tmst(tree, paths, dists)


def reduce_triangle(instance: Instance, max_tmst_cost: Optional[int]) -> List[ReductionEvent]:
    """Remove every edge costlier than the most expensive terminal-MST edge."""
    if max_tmst_cost is None:
        return []
    return [ReductionEvent("edge", (u, v), TRIANGLE)
            for u, v, c in instance.graph.edges() if c > max_tmst_cost]


# --- special distance -----------------------------------------------------

@dataclass
class SpecialDistanceContext:
    dists: Dict[int, PathResult]
    bottleneck: Dict[int, Dict[int, int]]
    cap: int
    _nearest: Dict[int, List[Tuple[int, int]]] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, instance: Instance, cap: int = DEFAULT_SD_CAP,
              tmst: Optional[Tmst] = None) -> "SpecialDistanceContext":
        if tmst is None:
            tmst = build_tmst(instance)
        return cls(tmst.dists, tmst.bottlenecks(), cap)

    def nearest(self, v: int) -> List[Tuple[int, int]]:
        """Up to ``cap`` closest terminals of ``v`` as (distance, terminal)."""
        got = self._nearest.get(v)
        if got is None:
            cand = ((pr.dist[v], t) for t, pr in self.dists.items() if v in pr.dist)
            got = heapq.nsmallest(self.cap, cand)
            self._nearest[v] = got
        return got

    def via_terminals(self, i: int, j: int) -> float:
        best = math.inf
        nj = self.nearest(j)
        for di, t1 in self.nearest(i):
            if di >= best:
                break
            row = self.bottleneck[t1]
            for dj, t2 in nj:
                if dj >= best:
                    break
                val = max(di, row[t2], dj)
                if val < best:
                    best = val

        return best


def special_distance(instance: Instance, i: int, j: int, k: int = DEFAULT_SD_CAP,
                     ctx: Optional[SpecialDistanceContext] = None) -> float:
    """Upper estimate of the special distance between ``i`` and ``j``.

    Special paths are restricted to those entering the terminal set through one
    of the ``k`` nearest terminals of each endpoint, so the value never falls
    below the exact special distance.
    """
    if ctx is None or ctx.cap != k:
        ctx = SpecialDistanceContext.build(instance, k)
    direct = dijkstra(instance.graph, i, stop=lambda u: u == j).dist.get(j, math.inf)
    return min(direct, ctx.via_terminals(i, j))


def reduce_special_distance(instance: Instance, k: int = DEFAULT_SD_CAP,
                            tmst: Optional[Tmst] = None) -> List[ReductionEvent]:
    """Remove edges strictly more expensive than the (estimated) special distance."""
    g = instance.graph
    if g.num_edges == 0:
        return []
    ctx = SpecialDistanceContext.build(instance, k, tmst)
    events = []
    for i in sorted(g.nodes):
        nb = {j: c for j, c in g.neighbors(i).items() if j > i}
        if not nb:
            continue
        doomed = set()
        for j, c in nb.items():
            if ctx.via_terminals(i, j) < c:
                doomed.add(j)
        rest = {j: c for j, c in nb.items() if j not in doomed and c > 0}
        if rest:
            settled = [0]

            def budget(_u, _s=settled):
                _s[0] += 1
                return _s[0] >= SD_SEARCH_BUDGET

            near = dijkstra(g, i, cutoff=max(rest.values()) - 1, stop=budget).dist
            doomed.update(j for j, c in rest.items() if near.get(j, c) < c)
        events.extend(ReductionEvent("edge", (i, j), SPECIAL_DISTANCE) for j in sorted(doomed))
    return events


# --- bound-based tests ----------------------------------------------------

def reduce_reachability(instance: Instance, bound: int,
                        dists: Optional[Dict[int, PathResult]] = None) -> List[ReductionEvent]:
    """Remove non-terminals whose farthest terminal lies beyond ``bound``."""
    if dists is None:
        dists = terminal_distances(instance)
    events = []
    for v in sorted(instance.graph.nodes - instance.terminals):
        far = max(pr.dist.get(v, math.inf) for pr in dists.values())
        if far > bound:
            events.append(ReductionEvent("node", (v,), REACHABILITY, bound))
    return events


@dataclass
class VoronoiPartition:
    base: Dict[int, int]
    base_dist: Dict[int, int]
    second: Dict[int, int]
    second_dist: Dict[int, int]
    radius: Dict[int, Optional[int]]
    unreachable: FrozenSet[int] = frozenset()

    @property
    def radii(self) -> List[int]:
        return sorted(r for r in self.radius.values() if r is not None)

    def region(self, z: int) -> FrozenSet[int]:
        return frozenset(v for v, b in self.base.items() if b == z)

    def lower_bound(self, v: int) -> Optional[int]:
        """Voronoi lower bound on any tree using ``v`` as a Steiner node."""
        if v not in self.second:
            return None
        radii = self.radii
        return self.base_dist[v] + self.second_dist[v] + sum(radii[:max(len(radii) - 2, 0)])


def voronoi_partition(instance: Instance,
                      dists: Optional[Dict[int, PathResult]] = None) -> VoronoiPartition:
    if dists is None:
        dists = terminal_distances(instance)
    base, base_d, second, second_d = {}, {}, {}, {}
    unreachable = set()
    for v in instance.graph.nodes:
        cand = heapq.nsmallest(2, ((pr.dist[v], t) for t, pr in dists.items() if v in pr.dist))
        if not cand:
            unreachable.add(v)
            continue
        base_d[v], base[v] = cand[0]
        if len(cand) > 1:
            second_d[v], second[v] = cand[1]
    radius: Dict[int, Optional[int]] = {}
    for z, pr in dists.items():
        outside = [d for v, d in pr.dist.items() if base.get(v) != z]
        radius[z] = min(outside) if outside else None
    return VoronoiPartition(base, base_d, second, second_d, radius, frozenset(unreachable))


def reduce_voronoi(instance: Instance, bound: int,
                   partition: Optional[VoronoiPartition] = None) -> List[ReductionEvent]:
    if partition is None:
        partition = voronoi_partition(instance)
    events = []
    for v in sorted(instance.graph.nodes - instance.terminals):
        if v in partition.unreachable:
            events.append(ReductionEvent("node", (v,), VORONOI, bound))
            continue
        lb = partition.lower_bound(v)
        if lb is not None and lb > bound:
            events.append(ReductionEvent("node", (v,), VORONOI, bound))
    return events


# --- driver ---------------------------------------------------------------

def reduce_fixpoint(instance: Instance, bound: Optional[int] = None,
                    tests: Sequence[str] = ALL_TESTS,
                    k: int = DEFAULT_SD_CAP) -> Tuple[Instance, ReductionLog]:
    """Apply the enabled tests in rounds until none of them fires.

    Bound-based tests only run when ``bound`` is given.
    """
    enabled = set(tests)
    if bound is None:
        enabled -= set(BOUND_TESTS)
    log = ReductionLog()
    while True:
        fired = 0
        for test in ALL_TESTS:
            if test not in enabled:
                continue
            events = _run_test(instance, test, bound, k)
            if events:
                instance = apply_events(instance, events)
                log.extend(events)
                fired += len(events)
        if not fired:
            break
    if len(instance.terminals) > 1:
        build_tmst(instance)  # raises if the reductions disconnected the terminals
    return instance, log


def _run_test(instance: Instance, test: str, bound: Optional[int], k: int) -> List[ReductionEvent]:
    if test == DEGREE:
        return reduce_degree(instance)
    if test == TRIANGLE:
        if len(instance.terminals) < 2:
            return []
        return reduce_triangle(instance, build_tmst(instance).max_cost)
    if test == SPECIAL_DISTANCE:
        return reduce_special_distance(instance, k)
    if test == REACHABILITY:
        return reduce_reachability(instance, bound)
    if test == VORONOI:
        return reduce_voronoi(instance, bound)
    raise ValueError(f"unknown reduction test {test!r}")
