"""Graph substrate: immutable weighted graphs, shortest paths, spanning trees and tree checks."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Set, Tuple

Edge = Tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class GraphError(ValueError):
    """Raised on malformed graph input (self-loops, unknown nodes, negative costs)."""


class InfeasibleError(ValueError):
    """Raised when the terminals cannot all be connected."""


class Graph:
    """Undirected graph with nonnegative integer edge costs.

    Instances are treated as immutable; reductions build a new graph with
    ``without_nodes`` / ``without_edges`` and keep the original node ids, so a
    removed node is simply absent from the live node set.
    """

    __slots__ = ("_adj", "_m")

    def __init__(self, nodes: Iterable[int] = (), edges: Iterable[Tuple[int, int, int]] = ()):
        adj: Dict[int, Dict[int, int]] = {int(v): {} for v in nodes}
        m = 0
        for u, v, c in edges:
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if c < 0:
                raise GraphError(f"negative cost {c} on edge ({u},{v})")
            if u not in adj or v not in adj:
                raise GraphError(f"edge ({u},{v}) references an unknown node")
            if v in adj[u]:
                raise GraphError(f"duplicate edge ({u},{v})")
            adj[u][v] = c
            adj[v][u] = c
            m += 1
        self._adj = adj
        self._m = m

    @classmethod
    def _from_adj(cls, adj: Dict[int, Dict[int, int]]) -> "Graph":
        g = cls.__new__(cls)
        g._adj = adj
        g._m = sum(len(nb) for nb in adj.values()) // 2
        return g

    def __repr__(self) -> str:
        return f"Graph(|V|={self.num_nodes}, |E|={self.num_edges})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self._adj == other._adj

    def __hash__(self) -> int:
        return hash((frozenset(self._adj), frozenset(self.edges())))

    def __contains__(self, v: int) -> bool:
        return v in self._adj

    @property
    def nodes(self) -> FrozenSet[int]:
        return frozenset(self._adj)

    @property
    def num_nodes(self) -> int:
        return len(self._adj)

    @property
    def num_edges(self) -> int:
        return self._m

    def neighbors(self, v: int) -> Mapping[int, int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return u in self._adj and v in self._adj[u]

    def cost(self, u: int, v: int) -> int:
        return self._adj[u][v]

    def edges(self) -> Iterator[Tuple[int, int, int]]:
        """Yield ``(u, v, cost)`` with ``u < v`` in ascending order."""
        for u in sorted(self._adj):
            for v in sorted(self._adj[u]):
                if u < v:
                    yield u, v, self._adj[u][v]

    def total_cost(self) -> int:
        return sum(c for _, _, c in self.edges())

    def without_nodes(self, removed: Iterable[int]) -> "Graph":
        gone = set(removed)
        if not gone:
            return self
        adj = {u: {v: c for v, c in nb.items() if v not in gone}
               for u, nb in self._adj.items() if u not in gone}
        return Graph._from_adj(adj)

    def without_edges(self, removed: Iterable[Edge]) -> "Graph":
        gone = {edge_key(u, v) for u, v in removed}
        if not gone:
            return self
        adj = {u: dict(nb) for u, nb in self._adj.items()}
        for u, v in gone:
            adj[u].pop(v, None)
            adj[v].pop(u, None)
        return Graph._from_adj(adj)

    def induced(self, keep: Iterable[int]) -> "Graph":
        keep = set(keep)
        adj = {u: {v: c for v, c in self._adj[u].items() if v in keep} for u in keep}
        return Graph._from_adj(adj)

    def edge_subgraph(self, edges: Iterable[Edge]) -> "Graph":
        adj: Dict[int, Dict[int, int]] = {}
        for u, v in edges:
            c = self._adj[u][v]
            adj.setdefault(u, {})[v] = c
            adj.setdefault(v, {})[u] = c
        return Graph._from_adj(adj)


@dataclass(frozen=True)
class Instance:
    graph: Graph
    terminals: FrozenSet[int]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        if not self.terminals:
            raise GraphError("an instance needs at least one terminal")
        missing = [t for t in self.terminals if t not in self.graph]
        if missing:
            raise GraphError(f"terminals {sorted(missing)} are not live nodes")

    def with_graph(self, graph: Graph) -> "Instance":
        return Instance(graph, self.terminals, self.name)


@dataclass(frozen=True)
class Solution:
    """A Steiner tree: its edges with their costs, its node set and total cost."""

    edges: Mapping[Edge, int]
    nodes: FrozenSet[int]
    cost: int

    @classmethod
    def from_edges(cls, graph: Graph, edges: Iterable[Edge], extra_nodes: Iterable[int] = ()) -> "Solution":
        emap = {}
        nodes = set(extra_nodes)
        for u, v in edges:
            k = edge_key(u, v)
            emap[k] = graph.cost(*k)
            nodes.update(k)
        return cls(emap, frozenset(nodes), sum(emap.values()))

    def __hash__(self) -> int:
        return hash((frozenset(self.edges.items()), self.nodes, self.cost))

    @property
    def edge_set(self) -> FrozenSet[Edge]:
        return frozenset(self.edges)

    def degrees(self) -> Dict[int, int]:
        deg = {v: 0 for v in self.nodes}
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@dataclass
class PathResult:
    source: int
    dist: Dict[int, int]
    pred: Dict[int, Optional[int]] = field(repr=False)

    def path_to(self, target: int) -> List[int]:
        """Node sequence from ``source`` to ``target``; empty if unreachable."""
        if target not in self.dist:
            return []
        path = [target]
        while path[-1] != self.source:
            path.append(self.pred[path[-1]])
        path.reverse()
        return path


def dijkstra(graph: Graph, source: int, *, blocked: Optional[Set[int]] = None,
             cutoff: Optional[int] = None,
             stop: Optional[Callable[[int], bool]] = None) -> PathResult:
    """Single-source shortest paths.

    Equal-distance ties pick the smallest predecessor id. ``blocked`` nodes are
    never entered, ``cutoff`` drops labels above it and ``stop`` ends the search
    right after the node it returns True for is settled.
    """
    if source not in graph:
        raise GraphError(f"unknown source node {source}")
    dist = {source: 0}
    pred: Dict[int, Optional[int]] = {source: None}
    done: Set[int] = set()
    heap = [(0, source)]
    adj = graph._adj
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if stop is not None and stop(u):
            break
        for v, c in adj[u].items():
            if v in done or (blocked is not None and v in blocked):
                continue
            nd = d + c
            if cutoff is not None and nd > cutoff:
                continue
            old = dist.get(v)
            if old is None or nd < old:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
            elif nd == old and u < pred[v]:
                pred[v] = u
    # drop tentative labels when stopped early
    if len(done) != len(dist):
        dist = {v: dist[v] for v in done}
        pred = {v: pred[v] for v in done}
    return PathResult(source, dist, pred)


class UnionFind:
    def __init__(self, items: Iterable[int] = ()):
        self.parent = {x: x for x in items}

    def find(self, x: int) -> int:
        parent = self.parent
        parent.setdefault(x, x)
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def kruskal(edges: Iterable[Tuple[int, int, int]]) -> List[Tuple[int, int, int]]:
    """Minimum spanning forest of ``(u, v, cost)`` triples.

    Ties are broken by the (cost, smaller endpoint, larger endpoint) order.
    """
    norm = sorted((c, min(u, v), max(u, v)) for u, v, c in edges)
    uf = UnionFind()
    out = []
    for c, u, v in norm:
        if uf.union(u, v):
            out.append((u, v, c))
    return out


def minimum_spanning_tree(graph: Graph) -> Tuple[Dict[Edge, int], int]:
    if graph.num_nodes == 0:
        raise GraphError("minimum spanning tree of an empty graph")
    tree = {(u, v): c for u, v, c in kruskal(graph.edges())}
    return tree, sum(tree.values())


def connected_components(nodes: Iterable[int], edges: Iterable[Edge]) -> List[FrozenSet[int]]:
    """Components of the graph (nodes, edges), sorted by smallest member."""
    uf = UnionFind(nodes)
    for u, v in edges:
        uf.union(u, v)
    groups: Dict[int, Set[int]] = {}
    for x in list(uf.parent):
        groups.setdefault(uf.find(x), set()).add(x)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def graph_components(graph: Graph) -> List[FrozenSet[int]]:
    return connected_components(graph.nodes, ((u, v) for u, v, _ in graph.edges()))


def validate_tree(candidate: Solution, instance: Instance) -> Optional[str]:
    """Return None if ``candidate`` is a Steiner tree of ``instance``, else the first violation."""
    g = instance.graph
    for u, v in sorted(candidate.edges):
        if not g.has_edge(u, v):
            return f"edge ({u},{v}) not in graph"
    nodes = set(candidate.nodes)
    for u, v in candidate.edges:
        nodes.update((u, v))
    uf = UnionFind(nodes)
    for u, v in sorted(candidate.edges):
        if not uf.union(u, v):
            return f"cycle through edge ({u},{v})"
    if len({uf.find(v) for v in nodes}) > 1:
        return "disconnected"
    for t in sorted(instance.terminals):
        if t not in nodes:
            return f"missing terminal {t}"
    actual = sum(g.cost(u, v) for u, v in candidate.edges)
    if actual != candidate.cost:
        return f"cost mismatch: recorded {candidate.cost}, edges sum to {actual}"
    return None


def prune_degree_one(candidate: Solution, terminals: Iterable[int]) -> Solution:
    """Strip non-terminal leaves until every leaf is a terminal."""
    terminals = set(terminals)
    edges = dict(candidate.edges)
    adj: Dict[int, Set[int]] = {v: set() for v in candidate.nodes}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    stack = [v for v in sorted(adj) if len(adj[v]) <= 1 and v not in terminals]
    removed = set()
    while stack:
        v = stack.pop()
        if v in removed or len(adj[v]) > 1:
            continue
        if len(adj[v]) == 0 and len(adj) - len(removed) == 1:
            break
        removed.add(v)
        for u in adj[v]:
            adj[u].discard(v)
            del edges[edge_key(u, v)]
            if len(adj[u]) <= 1 and u not in terminals:
                stack.append(u)
        adj[v] = set()
    if not removed:
        return candidate
    return Solution(edges, frozenset(adj.keys() - removed), sum(edges.values()))


def tree_from_edges(graph: Graph, edges: Iterable[Edge], terminals: Iterable[int],
                    extra_nodes: Iterable[int] = ()) -> Solution:
    """MST of the given edge set followed by leaf pruning."""
    edges = {edge_key(u, v) for u, v in edges}
    tree = kruskal((u, v, graph.cost(u, v)) for u, v in edges)
    nodes = set(extra_nodes)
    for u, v in edges:
        nodes.update((u, v))
    sol = Solution({(u, v): c for u, v, c in tree}, frozenset(nodes), sum(c for _, _, c in tree))
    return prune_degree_one(sol, terminals)
