"""UCT tree search baseline over the node-placement MDP.

The budget counts virtual-link routing attempts. A rollout that fails before
routing anything is still charged one unit so the search always terminates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .links import vlink
from .nrpa import RolloutResult, SearchContext


@dataclass
class UctNode:
    key: tuple[int, ...]
    visit_count: int = 0
    total_reward: float = 0.0
    children: dict[int, "UctNode"] = field(default_factory=dict)
    untried: list[int] | None = None

    @property
    def mean(self) -> float:
        return self.total_reward / self.visit_count


class UctTree:
    def __init__(self, ctx: SearchContext, c: float = math.sqrt(2),
                 rng: np.random.Generator | None = None):
        self.ctx = ctx
        self.c = c
        self.rng = np.random.default_rng() if rng is None else rng
        self.root = UctNode(())
        self.leaf_rewards: list[float] = []
        self.spent = 0
        self.best = RolloutResult(0.0, (), None)

    def _legal(self, seq: list[int], used: np.ndarray) -> np.ndarray:
        if len(seq) == len(self.ctx.order):
            return np.empty(0, dtype=np.int64)
        return self.ctx.legal(len(seq), used)

    def _select_child(self, node: UctNode) -> tuple[int, UctNode]:
        log_n = math.log(node.visit_count)
        best_a, best_child, best_u = -1, None, -math.inf
        for a, child in node.children.items():
            u = child.mean + self.c * math.sqrt(log_n / child.visit_count)
            if u > best_u:
                best_a, best_child, best_u = a, child, u
        return best_a, best_child

    def iterate(self) -> float:
        ctx = self.ctx
        used = np.zeros(ctx.n, dtype=bool)
        seq: list[int] = []
        path = [self.root]
        node = self.root
        # selection and expansion
        while True:
            if node.untried is None:
                node.untried = [int(a) for a in self._legal(seq, used)]
            if node.untried:
                a = node.untried.pop(int(self.rng.integers(len(node.untried))))
                child = UctNode(node.key + (a,))
                node.children[a] = child
                seq.append(a)
                used[a] = True
                path.append(child)
                break
            if not node.children:
                break
            a, node = self._select_child(node)
            seq.append(a)
            used[a] = True
            path.append(node)
        # uniform random rollout
        while len(seq) < len(ctx.order):
            legal = ctx.legal(len(seq), used)
            if len(legal) == 0:
                break
            a = int(legal[self.rng.integers(len(legal))])
            seq.append(a)
            used[a] = True
        r = self._evaluate(seq)
        self.leaf_rewards.append(r)
        for n in path:
            n.visit_count += 1
            n.total_reward += r
        return r

    def _evaluate(self, seq: list[int]) -> float:
        ctx = self.ctx
        if len(seq) < len(ctx.order):
            self.spent += 1
            return 0.0
        before = ctx.stats.bfs_calls
        hosts = ctx.hosts_of(seq)
        link_map = vlink(ctx.slice, hosts, ctx.net, ctx.residual, ctx.stats)
        self.spent += max(1, ctx.stats.bfs_calls - before)
        ctx.stats.simulations += 1
        if link_map is None:
            return 0.0
        r = ctx.score(hosts, link_map)
        if r > self.best.reward:
            self.best = RolloutResult(r, tuple(seq), link_map)
        return r

    def run(self, budget: int) -> RolloutResult:
        if budget < 1:
            raise ValueError("budget must be >= 1")
        while self.spent < budget:
            self.iterate()
        return self.best


def uct_search(ctx: SearchContext, budget: int = 445, c: float = math.sqrt(2),
               rng: np.random.Generator | None = None) -> RolloutResult:
    """Best terminal embedding found by UCT within ``budget`` link-routing attempts."""
    return UctTree(ctx, c, rng).run(budget)
