"""Neighbourhood refinement of incumbent embeddings and the refined nested search."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .links import bfs_capacity_path, link_order
from .network import SliceRequest
from .nrpa import Policy, RolloutResult, SearchContext, nested_search


@dataclass(frozen=True)
class RefineConfig:
    """K candidate hosts per move, at most X moves, refine at level ``l_prime``.

    ``x=None`` means one move per virtual node of the slice.
    """

    k: int = 16
    x: int | None = None
    l_prime: int = 2

    def __post_init__(self):
        if self.k < 1 or (self.x is not None and self.x < 1) or self.l_prime < 0:
            raise ValueError(f"invalid refine config {self}")


def improvement_score(vnode: int, link_map: Sequence[Sequence[int]], slice_: SliceRequest) -> float | None:
    """Bandwidth-weighted mean path length of the vnode's links; None for isolated vnodes."""
    inc = slice_.incident[vnode]
    if not inc:
        return None
    return sum(slice_.vedges[k][2] * len(link_map[k]) for k in inc) / len(inc)


def most_promising_vnode(slice_: SliceRequest, link_map) -> int | None:
    best, best_score = None, -1.0
    for v in range(slice_.n_nodes):
        s = improvement_score(v, link_map, slice_)
        if s is not None and s > best_score:
            best, best_score = v, s
    return best


def candidate_hosts(dist: np.ndarray, hosts: Sequence[int], moving: int, k: int,
                    residual_cpu: Sequence[int], demand: int) -> list[int]:
    """Up to ``k`` free nodes closest (mean hops) to the slice's other hosts.

    Nodes hosting another vnode, lacking CPU, or currently hosting ``moving``
    are excluded. Ties go to the lowest node id.
    """
    n = dist.shape[0]
    others = [h for v, h in enumerate(hosts) if v != moving]
    taken = set(hosts)
    if others:
        score = -dist[others].mean(axis=0)
    else:
        score = np.full(n, 1.0 / n)
    eligible = [j for j in range(n) if j not in taken and residual_cpu[j] >= demand]
    eligible.sort(key=lambda j: (-score[j], j))
    return eligible[:k]


def _usage(slice_: SliceRequest, link_map, residual: list[int]) -> list[int]:
    res = list(residual)
    for (_, _, bw), path in zip(slice_.vedges, link_map):
        for e in path:
            res[e] -= bw
    return res


def refine_rollout(ctx: SearchContext, result: RolloutResult,
                   cfg: RefineConfig) -> tuple[RolloutResult, bool]:
    """Hill-climb single-vnode moves from a successful rollout.

    Returns the refined rollout and whether the climb stopped because a full
    round brought no improvement.
    """
    stats = ctx.stats
    stats.refines += 1
    slice_, net = ctx.slice, ctx.net
    if result.link_map is None or result.reward <= 0:
        return result, True
    hosts = ctx.hosts_of(result.seq)
    paths = list(result.link_map)
    res = _usage(slice_, paths, ctx.residual)
    best_r = result.reward
    rounds = cfg.x if cfg.x is not None else slice_.n_nodes
    converged = False
    for _ in range(rounds):
        previous = best_r
        v = most_promising_vnode(slice_, paths)
        if v is None:
            converged = True
            break
        incident = slice_.incident[v]
        cands = candidate_hosts(ctx.dist, hosts, v, cfg.k, ctx.residual_cpu, slice_.cpu[v])
        for c in cands:
            stats.refine_evaluations += 1
            trial = list(res)
            for k in incident:
                bw = slice_.vedges[k][2]
                for e in paths[k]:
                    trial[e] += bw
            new_hosts = list(hosts)
            new_hosts[v] = c
            new_paths = list(paths)
            ok = True
            for k in link_order(slice_, incident):
                a, b, bw = slice_.vedges[k]
                stats.bfs_calls += 1
                p = bfs_capacity_path(net, new_hosts[a], new_hosts[b], bw, trial)
                if p is None:
                    ok = False
                    break
                for e in p:
                    trial[e] -= bw
                new_paths[k] = tuple(p)
            if not ok:
                continue
            r = ctx.score(new_hosts, tuple(new_paths))
            if r > best_r:
                best_r, hosts, paths, res = r, new_hosts, new_paths, trial
        if previous == best_r:
            converged = True
            break
    if best_r == result.reward:
        return result, converged
    # moved hosts satisfy every pruning rule, so adapt can replay ``seq``
    seq = tuple(hosts[v] for v in ctx.order)
    return RolloutResult(best_r, seq, tuple(paths)), converged


def refine(ctx: SearchContext, result: RolloutResult, cfg: RefineConfig) -> RolloutResult:
    return refine_rollout(ctx, result, cfg)[0]


def nepa_search(ctx: SearchContext, level: int, n_iter: int, cfg: RefineConfig,
                policy: Policy | None = None,
                rng: np.random.Generator | None = None) -> RolloutResult:
    policy = Policy() if policy is None else policy
    rng = np.random.default_rng() if rng is None else rng
    return nested_search(ctx, level, n_iter, policy, rng, refine_cfg=cfg)
