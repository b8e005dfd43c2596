"""Greedy shortest-path placement of virtual links."""
from __future__ import annotations

from collections import deque
from typing import Sequence

from .network import PhysicalNetwork, SliceRequest


def bfs_capacity_path(net: PhysicalNetwork, src: int, dst: int, min_bw: int,
                      residual: Sequence[int] | None = None) -> list[int] | None:
    """Minimum-hop edge path from ``src`` to ``dst`` using edges with residual >= ``min_bw``.

    Neighbours are expanded in ascending id order, which fixes the tie-break
    among equal-length paths.
    """
    if src == dst:
        return []
    if residual is None:
        residual = net.residual_bw()
    adj = net.adjacency
    parent: dict[int, tuple[int, int]] = {src: (-1, -1)}
    queue = deque((src,))
    while queue:
        u = queue.popleft()
        for v, e in adj[u]:
            if v in parent or residual[e] < min_bw:
                continue
            parent[v] = (u, e)
            if v == dst:
                path = []
                while v != src:
                    v, e = parent[v]
                    path.append(e)
                path.reverse()
                return path
            queue.append(v)
    return None


def link_order(slice_: SliceRequest, edges: Sequence[int] | None = None) -> list[int]:
    """Virtual edge indices by descending demand, ties by index."""
    ks = range(slice_.n_edges) if edges is None else edges
    return sorted(ks, key=lambda k: (-slice_.vedges[k][2], k))


def vlink(slice_: SliceRequest, hosts: Sequence[int], net: PhysicalNetwork,
          residual: list[int] | None = None, stats=None) -> tuple[tuple[int, ...], ...] | None:
    """Route every virtual edge of a complete node placement.

    Works on a private copy of the residual bandwidth, so a failure leaves no
    trace on ``net``. Returns the per-edge paths, or None when some edge has
    no feasible path.
    """
    res = list(net.residual_bw() if residual is None else residual)
    paths: list[tuple[int, ...] | None] = [None] * slice_.n_edges
    for k in link_order(slice_):
        a, b, bw = slice_.vedges[k]
        if stats is not None:
            stats.bfs_calls += 1
        path = bfs_capacity_path(net, hosts[a], hosts[b], bw, res)
        if path is None:
            return None
        for e in path:
            res[e] -= bw
        paths[k] = tuple(path)
    return tuple(paths)  # type: ignore[arg-type]
