"""Substrate and slice graphs, resource accounting and topology statistics.

Physical node ids and edge ids are 0-based indices into the capacity lists.
Virtual nodes are identified by their index in ``SliceRequest.cpu``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

log = logging.getLogger(__name__)


class InfeasibleCommit(RuntimeError):
    pass


class UnknownSlice(KeyError):
    pass


class Disconnected(ValueError):
    pass


class DegenerateInput(ValueError):
    pass


@dataclass
class Allocation:
    """Resources held by one committed slice."""

    hosts: tuple[int, ...]
    cpu: tuple[int, ...]
    link_map: tuple[tuple[int, ...], ...]
    bw: tuple[int, ...]


class PhysicalNetwork:
    """Undirected simple substrate graph with integer CPU/BW capacities.

    Duplicate edges are merged by summing their capacity. Edges with zero
    capacity are dropped since they do not exist in the model.
    """

    def __init__(
        self,
        cpu_capacity: Sequence[int],
        edges: Iterable[tuple[int, int, int]],
    ):
        self.cpu_capacity = [int(c) for c in cpu_capacity]
        n = len(self.cpu_capacity)
        merged: dict[tuple[int, int], int] = {}
        for u, v, bw in edges:
            u, v, bw = int(u), int(v), int(bw)
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) references unknown node")
            key = (min(u, v), max(u, v))
            if key in merged:
                log.warning("duplicate edge %s merged by summing capacity", key)
                merged[key] += bw
            else:
                merged[key] = bw
        self.edges: list[tuple[int, int]] = []
        self.bw_capacity: list[int] = []
        for key in sorted(merged):
            if merged[key] > 0:
                self.edges.append(key)
                self.bw_capacity.append(merged[key])
        self.cpu_occupied = [0] * n
        self.bw_occupied = [0] * len(self.edges)
        self.adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self._edge_index: dict[tuple[int, int], int] = {}
        for eid, (u, v) in enumerate(self.edges):
            self.adjacency[u].append((v, eid))
            self.adjacency[v].append((u, eid))
            self._edge_index[(u, v)] = eid
        for nbrs in self.adjacency:
            nbrs.sort()
        self.live: dict[int, Allocation] = {}

    @property
    def n_nodes(self) -> int:
        return len(self.cpu_capacity)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_id(self, u: int, v: int) -> int | None:
        return self._edge_index.get((min(u, v), max(u, v)))

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def residual_cpu(self) -> list[int]:
        return [c - o for c, o in zip(self.cpu_capacity, self.cpu_occupied)]

    def residual_bw(self) -> list[int]:
        return [c - o for c, o in zip(self.bw_capacity, self.bw_occupied)]

    @cached_property
    def distance(self) -> np.ndarray:
        return hop_distance_matrix(self)

    def is_connected(self) -> bool:
        if self.n_nodes == 0:
            return False
        return bool((self.distance < self.n_nodes).all()) or self.n_nodes == 1

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        for i, c in enumerate(self.cpu_capacity):
            g.add_node(i, cpu=c)
        for (u, v), bw in zip(self.edges, self.bw_capacity):
            g.add_edge(u, v, bw=bw)
        return g

    def copy(self) -> "PhysicalNetwork":
        """Fresh network with the same capacities and occupancy."""
        other = PhysicalNetwork(
            self.cpu_capacity,
            [(u, v, bw) for (u, v), bw in zip(self.edges, self.bw_capacity)],
        )
        other.cpu_occupied = list(self.cpu_occupied)
        other.bw_occupied = list(self.bw_occupied)
        other.live = dict(self.live)
        if "distance" in self.__dict__:
            other.__dict__["distance"] = self.__dict__["distance"]
        return other

    def __repr__(self) -> str:
        return f"PhysicalNetwork(|V|={self.n_nodes}, |E|={self.n_edges}, live={len(self.live)})"


@dataclass
class SliceRequest:
    """A virtual network request.

    ``vedges`` holds ``(a, b, bw_demand)`` triples over vnode indices.
    """

    id: int
    cpu: tuple[int, ...]
    vedges: tuple[tuple[int, int, int], ...]
    t_arrive: float = 0.0
    t_depart: float = math.inf

    def __post_init__(self):
        self.cpu = tuple(int(c) for c in self.cpu)
        self.vedges = tuple((int(a), int(b), int(bw)) for a, b, bw in self.vedges)
        if any(c <= 0 for c in self.cpu) or any(bw <= 0 for _, _, bw in self.vedges):
            raise ValueError(f"slice {self.id}: demands must be strictly positive")
        seen = set()
        for a, b, _ in self.vedges:
            key = (min(a, b), max(a, b))
            if a == b or key in seen or not (0 <= a < len(self.cpu) and 0 <= b < len(self.cpu)):
                raise ValueError(f"slice {self.id}: invalid virtual edge ({a}, {b})")
            seen.add(key)
        if not self.t_arrive < self.t_depart:
            raise ValueError(f"slice {self.id}: t_arrive must precede t_depart")

    @property
    def n_nodes(self) -> int:
        return len(self.cpu)

    @property
    def n_edges(self) -> int:
        return len(self.vedges)

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """Virtual edge indices touching each vnode."""
        inc: list[list[int]] = [[] for _ in self.cpu]
        for k, (a, b, _) in enumerate(self.vedges):
            inc[a].append(k)
            inc[b].append(k)
        return tuple(tuple(x) for x in inc)

    def degree(self, vnode: int) -> int:
        return len(self.incident[vnode])

    def is_connected(self) -> bool:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_edges_from((a, b) for a, b, _ in self.vedges)
        return self.n_nodes > 0 and nx.is_connected(g)


@dataclass(frozen=True)
class GraphStats:
    mean_distance: float
    diameter: int
    distance_stddev: float
    clustering_coefficient: float


def hop_distance_matrix(net: PhysicalNetwork) -> np.ndarray:
    """All-pairs hop counts, ignoring capacities.

    Unreachable pairs get the sentinel ``|V|``.
    """
    n = net.n_nodes
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    rows = [u for u, v in net.edges] + [v for u, v in net.edges]
    cols = [v for u, v in net.edges] + [u for u, v in net.edges]
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    d = shortest_path(adj, method="D", unweighted=True, directed=False)
    d[np.isinf(d)] = n
    return d.astype(np.int64)


def commit_embedding(net: PhysicalNetwork, slice_: SliceRequest, hosts: Sequence[int],
                     link_map: Sequence[Sequence[int]]) -> PhysicalNetwork:
    """Reserve the slice's resources on ``net`` (in place) and remember them."""
    if slice_.id in net.live:
        raise InfeasibleCommit(f"slice {slice_.id} already committed")
    hosts = tuple(int(h) for h in hosts)
    link_map = tuple(tuple(int(e) for e in p) for p in link_map)
    if len(hosts) != slice_.n_nodes or len(link_map) != slice_.n_edges:
        raise InfeasibleCommit(f"slice {slice_.id}: incomplete embedding")
    cpu_delta: dict[int, int] = {}
    for v, h in enumerate(hosts):
        cpu_delta[h] = cpu_delta.get(h, 0) + slice_.cpu[v]
    bw_delta: dict[int, int] = {}
    for (_, _, bw), path in zip(slice_.vedges, link_map):
        for e in path:
            bw_delta[e] = bw_delta.get(e, 0) + bw
    for h, c in cpu_delta.items():
        if net.cpu_occupied[h] + c > net.cpu_capacity[h]:
            raise InfeasibleCommit(f"slice {slice_.id}: CPU overflow on node {h}")
    for e, b in bw_delta.items():
        if net.bw_occupied[e] + b > net.bw_capacity[e]:
            raise InfeasibleCommit(f"slice {slice_.id}: BW overflow on edge {e}")
    for h, c in cpu_delta.items():
        net.cpu_occupied[h] += c
    for e, b in bw_delta.items():
        net.bw_occupied[e] += b
    net.live[slice_.id] = Allocation(hosts, slice_.cpu, link_map,
                                     tuple(bw for _, _, bw in slice_.vedges))
    return net


def release_embedding(net: PhysicalNetwork, slice_id: int) -> PhysicalNetwork:
    try:
        alloc = net.live.pop(slice_id)
    except KeyError:
        raise UnknownSlice(slice_id) from None
    for h, c in zip(alloc.hosts, alloc.cpu):
        net.cpu_occupied[h] -= c
    for path, bw in zip(alloc.link_map, alloc.bw):
        for e in path:
            net.bw_occupied[e] -= bw
    return net


def graph_stats(net: PhysicalNetwork | nx.Graph) -> GraphStats:
    """Distance and clustering statistics of a connected graph.

    Mean and standard deviation (population) run over unordered pairs of
    distinct nodes; clustering is the average local coefficient.
    """
    g = net if isinstance(net, nx.Graph) else net.to_networkx()
    n = g.number_of_nodes()
    if n < 2 or not nx.is_connected(g):
        raise Disconnected("graph statistics need a connected graph with at least 2 nodes")
    nodes = list(g.nodes)
    index = {u: i for i, u in enumerate(nodes)}
    rows = [index[u] for u, v in g.edges] + [index[v] for u, v in g.edges]
    cols = [index[v] for u, v in g.edges] + [index[u] for u, v in g.edges]
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    d = shortest_path(adj, unweighted=True, directed=False)
    pairs = d[np.triu_indices(n, k=1)]
    return GraphStats(
        mean_distance=float(pairs.mean()),
        diameter=int(pairs.max()),
        distance_stddev=float(pairs.std()),
        clustering_coefficient=float(nx.average_clustering(nx.Graph(g))),
    )


def pearson_correlation(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise DegenerateInput("need two equal-length sequences of at least 2 values")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))
