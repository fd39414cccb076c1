"""Reducer/solver coordination: bounds flow to the reducer, reductions flow to the solver.

Reduction deltas are only adopted between VND rounds. In deterministic mode
the reducer runs inline, one task per round; otherwise it runs on a
background thread and the solver picks up whatever has arrived at each round
boundary.
"""

from __future__ import annotations

import json
import queue
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from .construct import initial_solution
from .graph import Instance, Solution, connected_components, graph_components, validate_tree
from .reduce import (ALL_TESTS, BOUND_TESTS, DEFAULT_SD_CAP, DEGREE, REACHABILITY, SPECIAL_DISTANCE,
                     TRIANGLE, VORONOI, ReductionEvent, ReductionLog, reduce_fixpoint)
from .scores import ScoreConfig, init_scores
from .vnd import VndParams, reconnect, vnd_descent


@dataclass(frozen=True)
class SolveConfig:
    vnd: VndParams = VndParams()
    scores: ScoreConfig = ScoreConfig()
    time_limit: float = 60.0
    deterministic: bool = False
    tests: FrozenSet[str] = frozenset(ALL_TESTS)
    sd_cap: int = DEFAULT_SD_CAP
    # consecutive non-improving descents allowed before giving up (None: vnd.max_restarts)
    outer_restarts: Optional[int] = None

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ValueError("time limit must be positive")
        unknown = set(self.tests) - set(ALL_TESTS)
        if unknown:
            raise ValueError(f"unknown reduction tests {sorted(unknown)}")
        object.__setattr__(self, "tests", frozenset(self.tests))


@dataclass(frozen=True)
class BoundRecord:
    cost: int
    seconds: float
    round: int
    solution: Optional[Solution] = field(default=None, compare=False, repr=False)


@dataclass
class SolveResult:
    name: str
    solution: Solution
    log: ReductionLog
    bounds: List[BoundRecord]
    timings: Dict[str, float]
    deterministic: bool

    @property
    def cost(self) -> int:
        return self.solution.cost

    @property
    def time_to_best(self) -> float:
        return self.bounds[-1].seconds

    @property
    def rounds_to_best(self) -> int:
        return self.bounds[-1].round

    def to_dict(self) -> dict:
        """JSON-ready summary; wall-clock fields are null in deterministic mode."""
        wall = not self.deterministic
        return {
            "name": self.name,
            "cost": self.cost,
            "edges": [list(e) for e in sorted(self.solution.edges)],
            "clock": "wall" if wall else "rounds",
            "time_to_best_ms": round(self.time_to_best * 1000, 3) if wall else None,
            "rounds_to_best": self.rounds_to_best,
            "bounds": [{"cost": b.cost, "time_ms": round(b.seconds * 1000, 3) if wall else None,
                        "round": b.round} for b in self.bounds],
            "reductions": self.log.summary(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class BoundSchedule:
    """Strictly decreasing incumbent bounds and the bound-test rounds they trigger."""

    def __init__(self):
        self.best: Optional[int] = None
        self.pending: List[int] = []
        self.scheduled = 0

    def submit_bound(self, cost: int) -> bool:
        if self.best is not None and cost >= self.best:
            return False
        self.best = cost
        self.pending.append(cost)
        self.scheduled += 1
        return True

    def take(self) -> Optional[int]:
        """Tightest pending bound (older ones are dominated), or None."""
        if not self.pending:
            return None
        b = min(self.pending)
        self.pending.clear()
        return b


def submit_bound(schedule: BoundSchedule, cost: int) -> bool:
    return schedule.submit_bound(cost)


@dataclass
class Delta:
    events: List[ReductionEvent]
    instance: Instance
    bound: Optional[int] = None


class Reducer:
    """Owns the reducer's view of the instance; every task returns a delta."""

    def __init__(self, instance: Instance, tests: FrozenSet[str], sd_cap: int):
        self.instance = instance
        self.tests = tests
        self.sd_cap = sd_cap
        self.general_done = not (tests & {TRIANGLE, SPECIAL_DISTANCE})

    def general(self) -> Delta:
        self.general_done = True
        enabled = [t for t in (DEGREE, TRIANGLE, SPECIAL_DISTANCE) if t in self.tests]
        return self._run(None, enabled)

    def bounded(self, bound: int) -> Delta:
        enabled = [t for t in (DEGREE, REACHABILITY, VORONOI) if t in self.tests]
        return self._run(bound, enabled)

    def _run(self, bound, enabled) -> Delta:
        reduced, log = reduce_fixpoint(self.instance, bound, enabled, self.sd_cap)
        self.instance = reduced
        return Delta(list(log), reduced, bound)


class _ReducerThread(threading.Thread):
    def __init__(self, reducer: Reducer, bound_tests: bool):
        super().__init__(daemon=True, name="reducer")
        self.reducer = reducer
        self.bound_tests = bound_tests
        self.inbox: "queue.Queue[int]" = queue.Queue()
        self.outbox: "queue.Queue[Delta]" = queue.Queue()
        self.halt = threading.Event()
        self.error: Optional[BaseException] = None

    def run(self):
        try:
            if not self.reducer.general_done:
                self.outbox.put(self.reducer.general())
            while not self.halt.is_set():
                try:
                    b = self.inbox.get(timeout=0.02)
                except queue.Empty:
                    continue
                while True:
                    try:
                        b = min(b, self.inbox.get_nowait())
                    except queue.Empty:
                        break
                if self.bound_tests:
                    self.outbox.put(self.reducer.bounded(b))
        except BaseException as exc:  # surfaced to the solver at the next round
            self.error = exc


def _fits(sol: Solution, instance: Instance) -> bool:
    g = instance.graph
    return all(v in g for v in sol.nodes) and all(g.has_edge(u, v) for u, v in sol.edges)


def repair(sol: Solution, instance: Instance, rng: random.Random) -> Solution:
    """Drop parts of ``sol`` missing from ``instance`` and reconnect what is left."""
    if _fits(sol, instance):
        return sol
    g = instance.graph
    nodes = {v for v in sol.nodes if v in g}
    edges = [e for e in sol.edges if g.has_edge(*e)]
    comps = [c for c in connected_components(nodes, edges) if c & instance.terminals]
    keep = frozenset().union(*comps)
    edges = [e for e in edges if e[0] in keep]
    return reconnect(instance, edges, keep, rng)


def _is_tree_graph(instance: Instance) -> bool:
    g = instance.graph
    return g.num_edges == g.num_nodes - 1 and len(graph_components(g)) == 1


def solve(instance: Instance, config: SolveConfig = SolveConfig()) -> SolveResult:
    t0 = time.perf_counter()
    deadline = t0 + config.time_limit
    original = instance
    params = config.vnd
    rng = random.Random(params.seed)
    timings: Dict[str, float] = {}

    # phase 1: the cheap degree test
    inst, first_log = reduce_fixpoint(instance, None, [DEGREE] if DEGREE in config.tests else [],
                                      config.sd_cap)
    log = ReductionLog(first_log)
    timings["reduce_s"] = time.perf_counter() - t0

    # phase 2: initial solution, first bound
    schedule = BoundSchedule()
    bounds: List[BoundRecord] = []
    state = {"incumbent": None, "round": 0, "inst": inst}

    def publish(sol: Solution) -> None:
        problem = validate_tree(sol, original)
        if problem is not None:
            raise AssertionError(f"solver produced an invalid tree: {problem}")
        if schedule.submit_bound(sol.cost):
            state["incumbent"] = sol
            bounds.append(BoundRecord(sol.cost, time.perf_counter() - t0, state["round"], sol))
            if worker is not None:
                worker.inbox.put(sol.cost)
                schedule.pending.clear()

    worker: Optional[_ReducerThread] = None
    t1 = time.perf_counter()
    publish(initial_solution(inst))
    timings["construct_s"] = time.perf_counter() - t1

    # phase 3: VND with the remaining tests alongside
    reducer = Reducer(inst, config.tests, config.sd_cap)
    bound_tests = bool(config.tests & set(BOUND_TESTS))
    if not config.deterministic:
        worker = _ReducerThread(reducer, bound_tests)
        worker.inbox.put(schedule.best)
        schedule.pending.clear()
        worker.start()

    def stop() -> bool:
        return time.perf_counter() >= deadline

    def next_delta() -> Optional[Delta]:
        if worker is None:
            if not reducer.general_done:
                return reducer.general()
            b = schedule.take()
            if b is not None and bound_tests:
                return reducer.bounded(b)
            return None
        if worker.error is not None:
            raise worker.error
        latest = None
        while True:
            try:
                d = worker.outbox.get_nowait()
            except Exception:
                break
            if latest is None:
                latest = d
            else:
                latest = Delta(latest.events + d.events, d.instance, d.bound)
        return latest

    def adopt(delta: Delta) -> None:
        inc = state["incumbent"]
        inc_live = _fits(inc, state["inst"])
        for ev in delta.events:
            if ev.kind == "node" and inc_live:
                assert ev.subject[0] not in inc.nodes, f"{ev.test} removed incumbent node {ev.subject[0]}"
        log.extend(delta.events)
        state["inst"] = delta.instance

    def on_round(cur: Solution) -> Optional[Tuple[Instance, Solution]]:
        state["round"] += 1
        delta = next_delta()
        if delta is None or not delta.events:
            if delta is not None:
                state["inst"] = delta.instance
            return None
        adopt(delta)
        inst_now = state["inst"]
        if _fits(cur, inst_now):
            return inst_now, cur
        inc = state["incumbent"]
        return inst_now, repair(inc, inst_now, rng)

    t2 = time.perf_counter()
    try:
        if not _is_tree_graph(inst):
            scores = init_scores(inst, config.scores)
            budget = params.max_restarts if config.outer_restarts is None else config.outer_restarts
            stale = 0
            while not stop():
                before = schedule.best
                start = repair(state["incumbent"], state["inst"], rng)
                vnd_descent(state["inst"], start, params, scores, rng, publish, stop, on_round)
                stale = 0 if schedule.best < before else stale + 1
                if stale > budget:
                    break
                scores.restart(rng)
    finally:
        if worker is not None:
            worker.halt.set()
            worker.join(timeout=5)
    # pick up reductions still queued so the log is complete
    if worker is None:
        while True:
            d = next_delta()
            if d is None:
                break
            adopt(d)
    timings["search_s"] = time.perf_counter() - t2
    timings["total_s"] = time.perf_counter() - t0

    best = state["incumbent"]
    assert validate_tree(best, original) is None
    return SolveResult(original.name, best, log, bounds, timings, config.deterministic)
