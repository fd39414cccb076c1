"""SteinLib STP reader, solution writer and the known-optima table."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .graph import Edge, Graph, Instance, Solution, edge_key, validate_tree

log = logging.getLogger(__name__)

MAGIC = "33D32945 STP File, STP Format Version 1.0"


class SteinLibError(ValueError):
    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


def _strip_quotes(s: str) -> str:
    s = s.strip()
    if len(s) >= 2 and s[0] == s[-1] == '"':
        return s[1:-1]
    return s


def _ints(parts: List[str], count: int, lineno: int) -> List[int]:
    if len(parts) < count:
        raise SteinLibError(f"expected {count} integers, got {len(parts)}", lineno)
    try:
        return [int(p) for p in parts[:count]]
    except ValueError:
        raise SteinLibError(f"non-integer field in {' '.join(parts)!r}", lineno) from None


def parse_stp(text: str) -> Tuple[Instance, Dict[str, str]]:
    """Parse an STP file into an ``Instance`` plus comment metadata.

    Parallel edges keep their cheapest cost, self-loops are dropped with a
    warning and unknown sections are skipped.
    """
    lines = text.splitlines()
    body = [(i + 1, ln.strip()) for i, ln in enumerate(lines)]
    body = [(n, ln) for n, ln in body if ln and not ln.startswith("#")]
    if not body or body[0][1].upper() != MAGIC.upper():
        raise SteinLibError("missing STP magic line", body[0][0] if body else 1)

    meta: Dict[str, str] = {}
    n_nodes = n_edges = n_terms = None
    edge_lines = 0
    term_lines = 0
    edges: Dict[Edge, int] = {}
    terminals: List[int] = []
    seen = set()
    section = None
    section_start = 0
    saw_eof = False

    for lineno, line in body[1:]:
        parts = line.split()
        key = parts[0].upper()
        if section is None:
            if key == "SECTION":
                if len(parts) < 2:
                    raise SteinLibError("SECTION without a name", lineno)
                section = parts[1].upper()
                section_start = lineno
                seen.add(section)
            elif key == "EOF":
                saw_eof = True
                break
            else:
                raise SteinLibError(f"unexpected line outside a section: {line!r}", lineno)
            continue
        if key == "END":
            if section == "GRAPH":
                if n_edges is not None and edge_lines != n_edges:
                    raise SteinLibError(f"declared {n_edges} edges, found {edge_lines}", lineno)
            elif section == "TERMINALS":
                if n_terms is not None and term_lines != n_terms:
                    raise SteinLibError(f"declared {n_terms} terminals, found {term_lines}", lineno)
            section = None
            continue
        if section == "COMMENT":
            meta[parts[0].lower()] = _strip_quotes(line[len(parts[0]):])
        elif section == "GRAPH":
            if key == "NODES":
                (n_nodes,) = _ints(parts[1:], 1, lineno)
            elif key == "EDGES":
                (n_edges,) = _ints(parts[1:], 1, lineno)
            elif key == "E":
                u, v, c = _ints(parts[1:], 3, lineno)
                edge_lines += 1
                if n_edges is not None and edge_lines > n_edges:
                    raise SteinLibError(f"declared {n_edges} edges but found more", lineno)
                if n_nodes is None:
                    raise SteinLibError("edge before Nodes declaration", lineno)
                for x in (u, v):
                    if not 1 <= x <= n_nodes:
                        raise SteinLibError(f"node {x} outside [1,{n_nodes}]", lineno)
                if c < 0:
                    raise SteinLibError(f"negative edge cost {c}", lineno)
                if u == v:
                    log.warning("line %d: dropping self-loop on node %d", lineno, u)
                    continue
                k = edge_key(u, v)
                if k not in edges or c < edges[k]:
                    edges[k] = c
            elif key in ("A", "ARCS"):
                raise SteinLibError("directed arcs are not supported", lineno)
            else:
                raise SteinLibError(f"unknown graph keyword {parts[0]!r}", lineno)
        elif section == "TERMINALS":
            if key == "TERMINALS":
                (n_terms,) = _ints(parts[1:], 1, lineno)
            elif key == "T":
                (t,) = _ints(parts[1:], 1, lineno)
                term_lines += 1
                if n_terms is not None and term_lines > n_terms:
                    raise SteinLibError(f"declared {n_terms} terminals but found more", lineno)
                if n_nodes is None or not 1 <= t <= n_nodes:
                    raise SteinLibError(f"terminal {t} outside [1,{n_nodes}]", lineno)
                terminals.append(t)
            elif key == "ROOT":
                pass
            else:
                raise SteinLibError(f"unknown terminals keyword {parts[0]!r}", lineno)
        # other sections (coordinates, presolve, ...) are skipped

    last = body[-1][0]
    if section is not None:
        raise SteinLibError(f"section {section} opened at line {section_start} is not closed", last)
    if not saw_eof:
        raise SteinLibError("missing EOF", last)
    for required in ("GRAPH", "TERMINALS"):
        if required not in seen:
            raise SteinLibError(f"missing SECTION {required.title()}", last)
    if n_nodes is None:
        raise SteinLibError("missing Nodes declaration", last)

    graph = Graph(range(1, n_nodes + 1), ((u, v, c) for (u, v), c in edges.items()))
    name = meta.get("name", "")
    return Instance(graph, frozenset(terminals), name), meta


def read_stp(path) -> Tuple[Instance, Dict[str, str]]:
    path = Path(path)
    instance, meta = parse_stp(path.read_text())
    if not instance.name:
        instance = Instance(instance.graph, instance.terminals, path.stem)
    return instance, meta


def format_stp(instance: Instance, name: Optional[str] = None) -> str:
    """Serialize an instance as STP text (nodes are written as 1..max id)."""
    n = max(instance.graph.nodes)
    edges = list(instance.graph.edges())
    out = [MAGIC, "", "SECTION Comment", f'Name "{name or instance.name}"', "END", "",
           "SECTION Graph", f"Nodes {n}", f"Edges {len(edges)}"]
    out += [f"E {u} {v} {c}" for u, v, c in edges]
    out += ["END", "", "SECTION Terminals", f"Terminals {len(instance.terminals)}"]
    out += [f"T {t}" for t in sorted(instance.terminals)]
    out += ["END", "", "EOF", ""]
    return "\n".join(out)


def write_solution(solution: Solution, instance: Instance, name: Optional[str] = None) -> str:
    problem = validate_tree(solution, instance)
    if problem is not None:
        raise ValueError(f"refusing to write an invalid solution: {problem}")
    lines = [f"NAME {name or instance.name}", f"COST {solution.cost}"]
    lines += [f"E {u} {v}" for u, v in sorted(solution.edges)]
    return "\n".join(lines) + "\n"


def parse_solution(text: str, instance: Optional[Instance] = None):
    """Read text produced by ``write_solution``.

    Returns ``(name, cost, edges)``, or a ``Solution`` when ``instance`` is given.
    """
    name, cost, edges = "", None, set()
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        key = parts[0].upper()
        if key == "NAME":
            name = line.split(None, 1)[1] if len(parts) > 1 else ""
        elif key == "COST":
            (cost,) = _ints(parts[1:], 1, lineno)
        elif key == "E":
            u, v = _ints(parts[1:], 2, lineno)
            edges.add(edge_key(u, v))
        else:
            raise SteinLibError(f"unknown solution line {line!r}", lineno)
    if cost is None:
        raise SteinLibError("missing COST line")
    if instance is None:
        return name, cost, frozenset(edges)
    extra = () if edges else sorted(instance.terminals)[:1]
    sol = Solution.from_edges(instance.graph, edges, extra)
    if sol.cost != cost:
        raise SteinLibError(f"recorded cost {cost} differs from edge sum {sol.cost}")
    return sol


@dataclass(frozen=True)
class KnownOptimum:
    cost: int
    optimal: bool


class OptimaTable(Dict[str, KnownOptimum]):
    def gap(self, name: str, value: float) -> Optional[float]:
        """Percent gap of ``value`` over the best known cost, rounded to 2 decimals."""
        known = self.get(name.upper())
        if known is None:
            return None
        return round((value - known.cost) / known.cost * 100, 2)

    def get(self, name, default=None):
        return super().get(name.upper(), default)

    def __contains__(self, name) -> bool:
        return super().__contains__(str(name).upper())


_TRUE = {"true", "1", "yes", "y"}
_FALSE = {"false", "0", "no", "n", ""}


def load_optima(text: str) -> OptimaTable:
    table = OptimaTable()
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        if row[0].strip().lower() == "name":
            continue
        if len(row) < 2:
            raise SteinLibError(f"expected name,cost[,is_optimal], got {row!r}", lineno)
        name = row[0].strip().upper()
        try:
            cost = int(row[1])
        except ValueError:
            raise SteinLibError(f"non-numeric cost {row[1]!r}", lineno) from None
        if cost <= 0:
            raise SteinLibError(f"cost must be positive, got {cost}", lineno)
        flag = row[2].strip().lower() if len(row) > 2 else ""
        if flag not in _TRUE | _FALSE:
            raise SteinLibError(f"bad optimality flag {row[2]!r}", lineno)
        if name in table:
            raise SteinLibError(f"duplicate instance {name}", lineno)
        dict.__setitem__(table, name, KnownOptimum(cost, flag in _TRUE))
    return table


def bundled_optima() -> OptimaTable:
    return load_optima(resources.files("stpvnd").joinpath("data/optima.csv").read_text())
