"""Nested rollout policy adaptation over the node-placement MDP.

Within one search the vnode order is fixed, so the prefix of actions taken so
far identifies the placement vector uniquely and is used as the state key.
Policy weights are stored per state as an array aligned with that state's
sorted legal actions. States never adapted are read through the
initialization rule (distance heuristic or zeros) without being stored, which
is observationally the same as lazy first-touch initialization.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .links import vlink
from .mdp import CandidateTable, MdpState, RewardFn, prune_candidates, reward
from .network import PhysicalNetwork, SliceRequest

WEIGHT_CLAMP = 100.0


class IllegalSequence(ValueError):
    pass


@dataclass
class SearchStats:
    """Instrumentation counters shared by one search."""

    simulations: int = 0
    adaptations: int = 0
    adaptations_by_level: dict[int, int] = field(default_factory=dict)
    bfs_calls: int = 0
    refines: int = 0
    refine_evaluations: int = 0


@dataclass(frozen=True)
class RolloutResult:
    reward: float
    seq: tuple[int, ...]
    link_map: tuple[tuple[int, ...], ...] | None

    def __post_init__(self):
        if self.reward > 0 and self.link_map is None:
            raise ValueError("positive reward without a link mapping")


class SearchContext:
    """Per-slice data shared by every rollout of a search.

    Captures the substrate residuals at construction time; the network itself
    is never mutated by the search.
    """

    def __init__(self, net: PhysicalNetwork, slice_: SliceRequest,
                 table: CandidateTable | None = None, reward_fn: RewardFn = reward,
                 init: str = "heuristic", stats: SearchStats | None = None):
        if init not in ("heuristic", "zero"):
            raise ValueError(f"unknown init mode {init!r}")
        self.net = net
        self.slice = slice_
        self.table = prune_candidates(net, slice_) if table is None else table
        self.order = self.table.order
        self.step_candidates = [np.asarray(self.table.candidates[v], dtype=np.int64)
                                for v in self.order]
        self.n = net.n_nodes
        self.dist = net.distance.astype(float)
        self.residual = net.residual_bw()
        self.residual_cpu = net.residual_cpu()
        self.reward_fn = reward_fn
        self.init = init
        self.stats = stats if stats is not None else SearchStats()
        # the residuals are frozen for the search, so both caches are exact
        self._nodes: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]] = {}
        self._routes: dict[tuple[int, ...], tuple] = {}

    def hosts_of(self, seq: Sequence[int]) -> list[int]:
        hosts = [0] * self.slice.n_nodes
        for v, a in zip(self.order, seq):
            hosts[v] = int(a)
        return hosts

    def score(self, hosts: Sequence[int], link_map) -> float:
        return self.reward_fn(self.slice, link_map, hosts, self.net)

    def initial_weights(self, legal: np.ndarray, distsum: np.ndarray, n_placed: int) -> np.ndarray:
        if self.init == "zero":
            return np.zeros(len(legal))
        if n_placed == 0:
            return np.full(len(legal), 1.0 / self.n)
        return -distsum[legal] / n_placed

    def legal(self, step: int, used: np.ndarray) -> np.ndarray:
        cand = self.step_candidates[step]
        return cand[~used[cand]]

    def node(self, key: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        """Sorted legal actions and their initial weights after playing ``key``."""
        hit = self._nodes.get(key)
        if hit is None:
            used = np.zeros(self.n, dtype=bool)
            idx = list(key)
            used[idx] = True
            distsum = self.dist[idx].sum(axis=0) if idx else np.zeros(self.n)
            legal = self.legal(len(key), used)
            hit = (legal, self.initial_weights(legal, distsum, len(key)))
            self._nodes[key] = hit
        return hit

    def route(self, seq: tuple[int, ...]):
        """Link map and reward of a complete placement, memoized per search."""
        hit = self._routes.get(seq)
        if hit is None:
            hosts = self.hosts_of(seq)
            link_map = vlink(self.slice, hosts, self.net, self.residual, self.stats)
            r = 0.0 if link_map is None else self.score(hosts, link_map)
            hit = (link_map, r)
            self._routes[seq] = hit
        return hit


def weight_init(state: MdpState, action: int, distances: np.ndarray, n: int) -> float:
    """Distance-based prior weight of taking ``action`` in ``state``.

    Minus the mean hop distance from ``action`` to the physical nodes already
    used by the slice, or ``1/n`` when nothing is placed yet.
    """
    used = [i for i, tag in enumerate(state.placement) if tag != 0]
    if not used:
        return 1.0 / n
    return -float(sum(distances[i, action] for i in used)) / len(used)


def softmax(weights: np.ndarray) -> np.ndarray:
    z = np.exp(weights - weights.max())
    return z / z.sum()


def gibbs_sample(actions: Sequence[int], weights: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an action with probability proportional to ``exp(weight)``."""
    z = np.cumsum(np.exp(weights - weights.max()))
    idx = int(np.searchsorted(z, rng.random() * z[-1], side="right"))
    return int(actions[min(idx, len(actions) - 1)])


class Policy:
    """Weights keyed by state, copy-on-write between recursion levels."""

    def __init__(self, table: dict[tuple[int, ...], np.ndarray] | None = None):
        self.table = {} if table is None else table

    def copy(self) -> "Policy":
        return Policy(dict(self.table))

    def state_weights(self, ctx: SearchContext, seq_prefix: Sequence[int]) -> dict[int, float]:
        """Weights of every legal action after playing ``seq_prefix``."""
        key = tuple(int(a) for a in seq_prefix)
        legal, init = ctx.node(key)
        w = self.table.get(key, init)
        return {int(a): float(x) for a, x in zip(legal, w)}


def simulate(ctx: SearchContext, policy: Policy, rng: np.random.Generator) -> RolloutResult:
    """One policy-guided descent to a terminal state, scored after link routing."""
    ctx.stats.simulations += 1
    table = policy.table
    seq: tuple[int, ...] = ()
    for _ in range(len(ctx.order)):
        legal, init = ctx.node(seq)
        if len(legal) == 0:
            return RolloutResult(0.0, seq, None)
        w = table.get(seq)
        seq = seq + (gibbs_sample(legal, init if w is None else w, rng),)
    link_map, r = ctx.route(seq)
    return RolloutResult(r, seq, link_map)


def adapt(ctx: SearchContext, policy: Policy, seq: Sequence[int], alpha: float = 1.0,
          level: int | None = None) -> Policy:
    """Shift the policy toward ``seq``; the input policy is left untouched."""
    ctx.stats.adaptations += 1
    if level is not None:
        by_level = ctx.stats.adaptations_by_level
        by_level[level] = by_level.get(level, 0) + 1
    if len(seq) > len(ctx.order):
        raise IllegalSequence("sequence longer than the slice")
    new = policy.copy()
    seq = tuple(int(a) for a in seq)
    for step, a in enumerate(seq):
        key = seq[:step]
        legal, init = ctx.node(key)
        idx = int(np.searchsorted(legal, a))
        if idx >= len(legal) or legal[idx] != a:
            raise IllegalSequence(f"action {a} is not legal at step {step}")
        w_old = policy.table.get(key)
        if w_old is None:
            w_old = init
        w_new = w_old - alpha * softmax(w_old)
        w_new[idx] += 1.0
        np.minimum(w_new, WEIGHT_CLAMP, out=w_new)
        np.maximum(w_new, -WEIGHT_CLAMP, out=w_new)
        new.table[key] = w_new
    return new


def nested_search(ctx: SearchContext, level: int, n_iter: int, policy: Policy,
                  rng: np.random.Generator, refine_cfg=None) -> RolloutResult:
    """Recursive search shared by NRPA and its refined variant.

    With ``refine_cfg`` set, the incumbent of each iteration at level
    ``refine_cfg.l_prime`` is improved by neighbourhood refinement before the
    policy is adapted toward it.
    """
    if level == 0:
        return simulate(ctx, policy, rng)
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    if refine_cfg is not None:
        from .nepa import refine_rollout
    best: RolloutResult | None = None
    settled = False
    for _ in range(n_iter):
        res = nested_search(ctx, level - 1, n_iter, policy, rng, refine_cfg)
        if best is None or best.reward <= res.reward:
            best = res
            settled = False
        if (refine_cfg is not None and level == refine_cfg.l_prime
                and best.reward != 0 and not settled):
            best, settled = refine_rollout(ctx, best, refine_cfg)
        policy = adapt(ctx, policy, best.seq, level=level)
    assert best is not None
    return best


def nrpa_search(ctx: SearchContext, level: int, n_iter: int, policy: Policy | None = None,
                rng: np.random.Generator | None = None) -> RolloutResult:
    policy = Policy() if policy is None else policy
    rng = np.random.default_rng() if rng is None else rng
    return nested_search(ctx, level, n_iter, policy, rng)


def expected_adaptations(n_iter: int, level: int) -> int:
    """Total adapt calls of a full search: N + N^2 + ... + N^level."""
    return sum(n_iter ** k for k in range(1, level + 1))


def expected_simulations(n_iter: int, level: int) -> int:
    return n_iter ** level if level > 0 else 1

