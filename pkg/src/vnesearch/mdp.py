"""Node-placement MDP: states, legal actions, rewards and action-space pruning.

State encoding follows the usual convention: ``placement[i]`` is ``vnode + 1``
for the vnode hosted on physical node ``i`` and 0 when the node is free, so
stored vnode ids are strictly positive.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .network import PhysicalNetwork, SliceRequest


class IllegalAction(ValueError):
    pass


class IncompleteEmbedding(ValueError):
    pass


@dataclass(frozen=True)
class MdpState:
    pending: tuple[int, ...]
    placement: tuple[int, ...]

    @property
    def terminal(self) -> bool:
        return not self.pending

    def hosts(self, n_vnodes: int) -> list[int | None]:
        out: list[int | None] = [None] * n_vnodes
        for node, tag in enumerate(self.placement):
            if tag:
                out[tag - 1] = node
        return out


@dataclass(frozen=True)
class Embedding:
    """A complete (or failed) slice embedding.

    ``seq`` lists the chosen physical nodes in processing ``order``;
    ``link_map[k]`` is the edge-id path carrying virtual edge ``k``.
    """

    seq: tuple[int, ...]
    order: tuple[int, ...]
    link_map: tuple[tuple[int, ...], ...] | None
    reward: float

    @property
    def hosts(self) -> tuple[int, ...]:
        if len(self.seq) != len(self.order):
            raise IncompleteEmbedding("node mapping incomplete")
        out = [0] * len(self.order)
        for v, node in zip(self.order, self.seq):
            out[v] = node
        return tuple(out)

    @property
    def success(self) -> bool:
        return self.reward > 0 and self.link_map is not None


@dataclass(frozen=True)
class CandidateTable:
    """Admissible hosts per vnode and the vnode processing order."""

    candidates: tuple[np.ndarray, ...]
    order: tuple[int, ...]

    @classmethod
    def unpruned(cls, net: PhysicalNetwork, slice_: SliceRequest,
                 order: Sequence[int] | None = None) -> "CandidateTable":
        """CPU filter only, with an explicit (default: natural) vnode order."""
        res = np.asarray(net.residual_cpu())
        cands = tuple(np.flatnonzero(res >= c) for c in slice_.cpu)
        order = tuple(range(slice_.n_nodes)) if order is None else tuple(order)
        return cls(cands, order)

    @property
    def rejectable(self) -> bool:
        return any(len(c) == 0 for c in self.candidates)


def prune_candidates(net: PhysicalNetwork, slice_: SliceRequest) -> CandidateTable:
    """Remove (vnode, node) pairs that cannot carry the vnode's adjacent links.

    A pair is dropped when the node lacks CPU, when the vnode's largest
    adjacent demand exceeds every incident residual of the node, or when the
    vnode's summed adjacent demand exceeds the node's summed incident
    residual. Vnodes are ordered by ascending candidate count, ties by id.
    """
    n = net.n_nodes
    res_cpu = np.asarray(net.residual_cpu(), dtype=np.int64)
    res_bw = net.residual_bw()
    node_max = np.zeros(n, dtype=np.int64)
    node_sum = np.zeros(n, dtype=np.int64)
    for u in range(n):
        vals = [res_bw[e] for _, e in net.adjacency[u]]
        if vals:
            node_max[u] = max(vals)
            node_sum[u] = sum(vals)
    cands = []
    for v, cpu in enumerate(slice_.cpu):
        ok = res_cpu >= cpu
        demands = [slice_.vedges[k][2] for k in slice_.incident[v]]
        if demands:
            ok &= node_max >= max(demands)
            ok &= node_sum >= sum(demands)
        cands.append(np.flatnonzero(ok))
    order = tuple(sorted(range(slice_.n_nodes), key=lambda v: (len(cands[v]), v)))
    return CandidateTable(tuple(cands), order)


def initial_state(slice_: SliceRequest, table: CandidateTable, n_physical: int) -> MdpState:
    return MdpState(tuple(table.order), (0,) * n_physical)


def legal_actions(state: MdpState, net: PhysicalNetwork, slice_: SliceRequest,
                  table: CandidateTable) -> set[int]:
    if not state.pending:
        return set()
    v = state.pending[0]
    demand = slice_.cpu[v]
    return {
        int(j) for j in table.candidates[v]
        if state.placement[j] == 0
        and net.cpu_capacity[j] - net.cpu_occupied[j] >= demand
    }


def apply_action(state: MdpState, action: int, vnode: int | None = None) -> MdpState:
    """Place the head pending vnode on physical node ``action``."""
    if not state.pending:
        raise IllegalAction("terminal state")
    head = state.pending[0]
    if vnode is not None and vnode != head:
        raise IllegalAction(f"vnode {vnode} is not next (expected {head})")
    if not 0 <= action < len(state.placement) or state.placement[action] != 0:
        raise IllegalAction(f"physical node {action} unavailable")
    placement = list(state.placement)
    placement[action] = head + 1
    return MdpState(state.pending[1:], tuple(placement))


def revenue(slice_: SliceRequest) -> int:
    return sum(slice_.cpu) + sum(bw for _, _, bw in slice_.vedges)


def cost(slice_: SliceRequest, link_map: Sequence[Sequence[int]] | None) -> int:
    if link_map is None or len(link_map) != slice_.n_edges:
        raise IncompleteEmbedding("link mapping incomplete")
    return sum(slice_.cpu) + sum(bw * len(p) for (_, _, bw), p in zip(slice_.vedges, link_map))


def reward(slice_: SliceRequest, link_map: Sequence[Sequence[int]] | None,
           hosts: Sequence[int] | None = None, net: PhysicalNetwork | None = None) -> float:
    """Revenue-to-cost ratio of a successful embedding, 0 on failure."""
    if link_map is None:
        return 0.0
    return revenue(slice_) / cost(slice_, link_map)


def afbd_reward(slice_: SliceRequest, link_map: Sequence[Sequence[int]] | None,
                hosts: Sequence[int] | None = None, net: PhysicalNetwork | None = None) -> float:
    """Inverse of bandwidth use plus host-vs-vnode degree surplus.

    A non-positive denominator is clamped to reward 1.
    """
    if link_map is None:
        return 0.0
    if hosts is None or net is None:
        raise IncompleteEmbedding("degree-based reward needs hosts and the substrate")
    bw_used = sum(bw * len(p) for (_, _, bw), p in zip(slice_.vedges, link_map))
    surplus = sum(net.degree(h) - slice_.degree(v) for v, h in enumerate(hosts))
    denom = bw_used + surplus
    if denom <= 0:
        return 1.0
    return 1.0 / denom


RewardFn = Callable[..., float]

REWARDS: dict[str, RewardFn] = {"rc": reward, "afbd": afbd_reward}
