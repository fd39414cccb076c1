"""Vertex scores steering start-node and victim selection in the local searches."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, FrozenSet, Iterable, List

PER_NODE = "node"
GLOBAL = "global"


@dataclass(frozen=True)
class ScoreConfig:
    score_max: int = 1000
    reward: int = 1
    penalty: int = 1
    restart_low: int = -5
    restart_high: int = 5
    window: int = 10
    # PER_NODE: a node's window advances only when its own score changes.
    # GLOBAL: every record_outcome call advances the window of every node.
    window_mode: str = PER_NODE

    def __post_init__(self):
        if self.window_mode not in (PER_NODE, GLOBAL):
            raise ValueError(f"unknown window mode {self.window_mode!r}")
        if self.window < 1 or self.restart_low > self.restart_high:
            raise ValueError("invalid score configuration")


class ScoreTable:
    def __init__(self, nodes: Iterable[int], terminals: Iterable[int], config: ScoreConfig = ScoreConfig()):
        self.config = config
        self.terminals: FrozenSet[int] = frozenset(terminals)
        self.score: Dict[int, int] = {}
        self.history: Dict[int, Deque[int]] = {}
        self.restarts = 0
        for v in sorted(set(nodes) | self.terminals):
            value = config.score_max if v in self.terminals else 0
            self.score[v] = value
            self.history[v] = deque([value], maxlen=config.window)

    def __repr__(self) -> str:
        return f"ScoreTable({len(self.score)} nodes, restarts={self.restarts})"

    def average(self, v: int) -> float:
        if v in self.terminals:
            return float(self.config.score_max)
        h = self.history[v]
        return sum(h) / len(h)

    def record_outcome(self, nodes: Iterable[int], improved: bool) -> None:
        step = self.config.reward if improved else -self.config.penalty
        touched = set()
        for v in nodes:
            if v in self.terminals or v in touched:
                continue
            touched.add(v)
            self.score[v] += step
            if self.config.window_mode == PER_NODE:
                self.history[v].append(self.score[v])
        if self.config.window_mode == GLOBAL:
            for v, h in self.history.items():
                if v not in self.terminals:
                    h.append(self.score[v])

    def reward(self, nodes: Iterable[int]) -> None:
        self.record_outcome(nodes, True)

    def penalize(self, nodes: Iterable[int]) -> None:
        self.record_outcome(nodes, False)

    def top_scored(self, candidates: Iterable[int], k: int) -> List[int]:
        """Candidates by descending window average (ties: ascending id), first ``k``."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        ranked = sorted(set(candidates), key=lambda v: (-self.average(v), v))
        return ranked[:k]

    def restart(self, rng: random.Random) -> None:
        """Redraw every non-terminal score uniformly and reset its window."""
        lo, hi = self.config.restart_low, self.config.restart_high
        for v in sorted(self.score):
            if v in self.terminals:
                continue
            value = rng.randint(lo, hi)
            self.score[v] = value
            self.history[v] = deque([value], maxlen=self.config.window)
        self.restarts += 1


def init_scores(instance, config: ScoreConfig = ScoreConfig()) -> ScoreTable:
    """Terminals start at the maximum score, every other live node at zero."""
    return ScoreTable(instance.graph.nodes, instance.terminals, config)
