"""Steiner tree solver: graph reductions coupled with variable neighborhood descent."""

from .construct import construct, initial_solution
from .exact import exact_steiner
from .graph import (Graph, GraphError, InfeasibleError, Instance, Solution, connected_components,
                    dijkstra, minimum_spanning_tree, prune_degree_one, validate_tree)
from .reduce import ReductionEvent, ReductionLog, reduce_fixpoint
from .scores import ScoreConfig, ScoreTable, init_scores
from .solve import SolveConfig, SolveResult, solve
from .steinlib import load_optima, parse_stp, read_stp, write_solution
from .vnd import VndParams, vnd_descent

__all__ = [
    "Graph", "GraphError", "InfeasibleError", "Instance", "ReductionEvent", "ReductionLog", "ScoreConfig",
    "ScoreTable", "Solution", "SolveConfig", "SolveResult", "VndParams", "connected_components", "construct",
    "dijkstra", "exact_steiner", "init_scores", "initial_solution", "load_optima", "minimum_spanning_tree",
    "parse_stp", "prune_degree_one", "read_stp", "reduce_fixpoint", "solve", "validate_tree", "vnd_descent",
    "write_solution",
]

__version__ = "0.1.0"
