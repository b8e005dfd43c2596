"""Random substrates, slice streams, perfectly solvable instances and file I/O."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np
from scipy.spatial.distance import pdist, squareform

from .network import PhysicalNetwork, SliceRequest

MAX_RESAMPLES = 1000


class GenerationFailure(RuntimeError):
    pass


class ParseError(ValueError):
    pass


class DisconnectedTopology(ValueError):
    pass


Range = tuple[int, int]


@dataclass(frozen=True)
class ScenarioConfig:
    """Substrate and slice-stream parameters; defaults give the standard benchmark."""

    substrate: str = "waxman"  # waxman | er | zoo
    n: int = 75
    alpha: float = 0.5
    beta: float = 0.2
    p: float = 0.05
    topology: str | None = None
    cpu_capacity: Range = (50, 100)
    bw_capacity: Range = (50, 100)
    n_slices: int = 500
    slice_size: Range = (7, 13)
    cpu_demand: Range = (1, 50)
    bw_demand: Range = (1, 50)
    slice_alpha: float = 0.5
    slice_beta: float = 0.2
    arrival_rate: float = 0.02
    departure_rate: float = 0.005
    seed: int = 0

    def __post_init__(self):
        for name in ("cpu_capacity", "bw_capacity", "slice_size", "cpu_demand", "bw_demand"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise ValueError(f"{name}: empty range ({lo}, {hi})")
        if self.slice_size[0] < 1 or self.cpu_demand[0] < 1 or self.bw_demand[0] < 1:
            raise ValueError("slice sizes and demands must be >= 1")
        if self.arrival_rate <= 0 or self.departure_rate <= 0:
            raise ValueError("arrival and departure rates must be positive")
        if self.substrate not in ("waxman", "er", "zoo"):
            raise ValueError(f"unknown substrate kind {self.substrate!r}")
        if self.substrate == "zoo" and self.topology is None:
            raise ValueError("zoo substrate needs a topology file")
        if self.n_slices < 0:
            raise ValueError("n_slices must be >= 0")


@dataclass
class Scenario:
    substrate: PhysicalNetwork
    requests: list[SliceRequest]
    # per-slice host tuple of a known perfect packing (PSS only)
    certificate: list[tuple[int, ...]] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.requests = sorted(self.requests, key=lambda s: (s.t_arrive, s.id))
        ids = [s.id for s in self.requests]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate slice ids")


def _uniform_ints(rng: np.random.Generator, bounds: Range, size: int) -> list[int]:
    return [int(x) for x in rng.integers(bounds[0], bounds[1] + 1, size=size)]


def waxman_edges(n: int, alpha: float, beta: float, rng: np.random.Generator
                 ) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Point coordinates and one Waxman edge draw over them."""
    pts = rng.random((n, 2))
    if n < 2:
        return pts, []
    d = pdist(pts)
    big_l = d.max()
    prob = alpha * np.exp(-d / (beta * big_l)) if big_l > 0 else np.full(len(d), alpha)
    keep = rng.random(len(d)) < prob
    iu, ju = np.triu_indices(n, k=1)
    return pts, [(int(u), int(v)) for u, v in zip(iu[keep], ju[keep])]


def _connected(n: int, edges) -> bool:
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    return nx.is_connected(g)


def _with_capacities(n: int, edges, cpu: Range, bw: Range, rng) -> PhysicalNetwork:
    cpus = _uniform_ints(rng, cpu, n)
    bws = _uniform_ints(rng, bw, len(edges))
    return PhysicalNetwork(cpus, [(u, v, b) for (u, v), b in zip(edges, bws)])


def gen_waxman(n: int, alpha: float, beta: float, cpu: Range, bw: Range,
               rng: np.random.Generator, max_attempts: int = MAX_RESAMPLES) -> PhysicalNetwork:
    """Connected Waxman substrate; the whole graph is redrawn until connected."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    for _ in range(max_attempts):
        _, edges = waxman_edges(n, alpha, beta, rng)
        if _connected(n, edges):
            return _with_capacities(n, edges, cpu, bw, rng)
    raise GenerationFailure(f"no connected Waxman graph after {max_attempts} draws")


def gen_er(n: int, p: float, cpu: Range, bw: Range, rng: np.random.Generator,
           max_attempts: int = MAX_RESAMPLES) -> PhysicalNetwork:
    if n < 2 or not 0 < p <= 1:
        raise ValueError("need n >= 2 and 0 < p <= 1")
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_attempts):
        keep = rng.random(len(iu)) < p
        edges = [(int(u), int(v)) for u, v in zip(iu[keep], ju[keep])]
        if _connected(n, edges):
            return _with_capacities(n, edges, cpu, bw, rng)
    raise GenerationFailure(f"no connected G(n, p) graph after {max_attempts} draws")


def connect_closest(pts: np.ndarray, edges: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Add edges joining the closest pair of points across components until connected."""
    n = len(pts)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    edges = list(edges)
    if n < 2:
        return edges
    dist = squareform(pdist(pts))
    while True:
        comps = list(nx.connected_components(g))
        if len(comps) == 1:
            return edges
        label = np.empty(n, dtype=int)
        for i, comp in enumerate(comps):
            label[list(comp)] = i
        masked = np.where(label[:, None] != label[None, :], dist, np.inf)
        u, v = np.unravel_index(int(np.argmin(masked)), masked.shape)
        u, v = int(min(u, v)), int(max(u, v))
        g.add_edge(u, v)
        edges.append((u, v))


def gen_slice_graph(size: int, alpha: float, beta: float, rng: np.random.Generator
                    ) -> list[tuple[int, int]]:
    pts, edges = waxman_edges(size, alpha, beta, rng)
    return sorted(connect_closest(pts, edges))


def gen_slice(slice_id: int, cfg: ScenarioConfig, rng: np.random.Generator,
              size: int | None = None, t_arrive: float = 0.0,
              t_depart: float = math.inf) -> SliceRequest:
    if size is None:
        size = int(rng.integers(cfg.slice_size[0], cfg.slice_size[1] + 1))
    edges = gen_slice_graph(size, cfg.slice_alpha, cfg.slice_beta, rng)
    cpu = _uniform_ints(rng, cfg.cpu_demand, size)
    bw = _uniform_ints(rng, cfg.bw_demand, len(edges))
    return SliceRequest(slice_id, tuple(cpu), tuple((a, b, w) for (a, b), w in zip(edges, bw)),
                        t_arrive, t_depart)


def gen_slice_stream(cfg: ScenarioConfig, rng: np.random.Generator) -> list[SliceRequest]:
    """Poisson arrivals with exponential lifetimes, each slice a connected Waxman graph."""
    out = []
    t = 0.0
    for i in range(cfg.n_slices):
        t += float(rng.exponential(1.0 / cfg.arrival_rate))
        life = float(rng.exponential(1.0 / cfg.departure_rate))
        out.append(gen_slice(i, cfg, rng, t_arrive=t, t_depart=t + max(life, 1e-9)))
    return out


def gen_substrate(cfg: ScenarioConfig, rng: np.random.Generator) -> PhysicalNetwork:
    if cfg.substrate == "waxman":
        return gen_waxman(cfg.n, cfg.alpha, cfg.beta, cfg.cpu_capacity, cfg.bw_capacity, rng)
    if cfg.substrate == "er":
        return gen_er(cfg.n, cfg.p, cfg.cpu_capacity, cfg.bw_capacity, rng)
    return load_zoo(cfg.topology, rng, cfg.bw_capacity, cfg.cpu_capacity)


def gen_scenario(cfg: ScenarioConfig) -> Scenario:
    rng = np.random.default_rng(cfg.seed)
    net = gen_substrate(cfg, rng)
    return Scenario(net, gen_slice_stream(cfg, rng), meta={"kind": cfg.substrate, "seed": cfg.seed})


def gen_pss(i: int, n_slices: int = 100, reuse_prob: float = 0.93,
            rng: np.random.Generator | None = None,
            cfg: ScenarioConfig | None = None) -> Scenario:
    """Arrivals-only instance built around a known packing that uses every resource exactly.

    Slices (sizes ``7+i`` to ``10+i``) are drawn first. Each vnode then either
    reuses a uniformly chosen existing node not yet used by its own slice
    (probability ``reuse_prob``) or opens a new node. Capacities are the sums
    of what the packing puts on each node and edge.
    """
    if not 0 <= reuse_prob < 1:
        raise ValueError("reuse_prob must be in [0, 1)")
    rng = np.random.default_rng() if rng is None else rng
    cfg = ScenarioConfig(slice_size=(7 + i, 10 + i)) if cfg is None else cfg
    slices = [gen_slice(k, cfg, rng, t_arrive=float(k + 1)) for k in range(n_slices)]
    cpu_cap: list[int] = []
    bw_cap: dict[tuple[int, int], int] = {}
    certificate = []
    for s in slices:
        hosts: list[int] = []
        taken: set[int] = set()
        for demand in s.cpu:
            eligible = [j for j in range(len(cpu_cap)) if j not in taken]
            if eligible and rng.random() < reuse_prob:
                h = eligible[int(rng.integers(len(eligible)))]
            else:
                h = len(cpu_cap)
                cpu_cap.append(0)
            cpu_cap[h] += demand
            taken.add(h)
            hosts.append(h)
        for a, b, w in s.vedges:
            key = (min(hosts[a], hosts[b]), max(hosts[a], hosts[b]))
            bw_cap[key] = bw_cap.get(key, 0) + w
        certificate.append(tuple(hosts))
    net = PhysicalNetwork(cpu_cap, [(u, v, w) for (u, v), w in sorted(bw_cap.items())])
    return Scenario(net, slices, certificate, meta={"kind": "pss", "i": i})


def certificate_paths(net: PhysicalNetwork, slice_: SliceRequest, hosts) -> tuple[tuple[int, ...], ...]:
    """Single-edge paths realizing a certificate placement."""
    return tuple((net.edge_id(hosts[a], hosts[b]),) for a, b, _ in slice_.vedges)


def load_zoo(path, rng: np.random.Generator, bw: Range = (250, 300),
             cpu: Range = (50, 100)) -> PhysicalNetwork:
    """GraphML topology with random capacities; parallel edges and self-loops dropped."""
    g = read_topology(path)
    if g.number_of_nodes() == 0 or not nx.is_connected(g):
        raise DisconnectedTopology(f"{path}: topology is not connected")
    index = {u: k for k, u in enumerate(g.nodes)}
    edges = sorted((min(index[u], index[v]), max(index[u], index[v])) for u, v in g.edges)
    return _with_capacities(g.number_of_nodes(), edges, cpu, bw, rng)


def read_topology(path) -> nx.Graph:
    """Simple undirected graph from GraphML, scenario JSON or a whitespace edge list."""
    path = Path(path)
    try:
        if path.suffix.lower() in (".graphml", ".xml"):
            raw = nx.read_graphml(path)
        elif path.suffix.lower() == ".json":
            raw = read_scenario(path).substrate.to_networkx()
        else:
            raw = nx.read_edgelist(path, data=False, comments="#")
    except (OSError, ParseError):
        raise
    except Exception as exc:
        raise ParseError(f"{path}: {exc}") from exc
    g = nx.Graph()
    g.add_nodes_from(raw.nodes)
    g.add_edges_from((u, v) for u, v in raw.edges if u != v)
    return g


def write_edgelist(net: PhysicalNetwork, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# nodes {net.n_nodes}\n")
        for (u, v), b in zip(net.edges, net.bw_capacity):
            fh.write(f"{u} {v} {b}\n")


def scenario_to_dict(sc: Scenario) -> dict:
    net = sc.substrate
    out = {
        "substrate": {
            "nodes": [{"cpu": c} for c in net.cpu_capacity],
            "edges": [{"u": u, "v": v, "bw": b} for (u, v), b in zip(net.edges, net.bw_capacity)],
        },
        "slices": [
            {
                "id": s.id,
                "t_arrive": s.t_arrive,
                "t_depart": None if math.isinf(s.t_depart) else s.t_depart,
                "vnodes": [{"cpu": c} for c in s.cpu],
                "vedges": [{"a": a, "b": b, "bw": w} for a, b, w in s.vedges],
            }
            for s in sc.requests
        ],
    }
    if sc.certificate is not None:
        out["certificate"] = [list(h) for h in sc.certificate]
    return out


def scenario_from_dict(data: dict) -> Scenario:
    try:
        sub = data["substrate"]
        net = PhysicalNetwork([nd["cpu"] for nd in sub["nodes"]],
                              [(e["u"], e["v"], e["bw"]) for e in sub["edges"]])
        reqs = []
        for s in data["slices"]:
            dep = s.get("t_depart")
            reqs.append(SliceRequest(
                int(s["id"]), tuple(v["cpu"] for v in s["vnodes"]),
                tuple((e["a"], e["b"], e["bw"]) for e in s["vedges"]),
                float(s.get("t_arrive", 0.0)), math.inf if dep is None else float(dep)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed scenario: {exc}") from exc
    cert = data.get("certificate")
    cert = [tuple(h) for h in cert] if cert is not None else None
    return Scenario(net, reqs, cert)


def write_scenario(sc: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(sc), fh, indent=1)
        fh.write("\n")


def read_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return scenario_from_dict(data)
