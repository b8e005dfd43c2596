"""Online event loop, batch aggregation and an independent feasibility check."""
from __future__ import annotations

import csv
import heapq
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mdp import cost, revenue
from .network import PhysicalNetwork, SliceRequest, release_embedding
from .placement import AlgoConfig, main_place
from .scenarios import Scenario

Z_99 = 2.576


@dataclass
class SliceRecord:
    id: int
    accepted: bool
    reward: float
    revenue: int
    cost: int
    wall_ms: float
    hosts: tuple[int, ...] | None = None
    link_map: tuple[tuple[int, ...], ...] | None = None


@dataclass
class SimulationReport:
    config: str
    seed: int
    records: list[SliceRecord] = field(default_factory=list)
    runtime_s: float = 0.0

    @property
    def arrived(self) -> int:
        return len(self.records)

    @property
    def accepted(self) -> int:
        return sum(r.accepted for r in self.records)

    @property
    def acceptance_ratio(self) -> float:
        return self.accepted / self.arrived if self.arrived else 0.0

    @property
    def revenue_cost_ratio(self) -> float:
        """Summed revenue over summed cost of accepted slices."""
        c = sum(r.cost for r in self.records if r.accepted)
        return sum(r.revenue for r in self.records if r.accepted) / c if c else 0.0

    @property
    def mean_slice_rtc(self) -> float:
        rs = [r.revenue / r.cost for r in self.records if r.accepted]
        return float(np.mean(rs)) if rs else 0.0

    @property
    def mean_ms_per_slice(self) -> float:
        return float(np.mean([r.wall_ms for r in self.records])) if self.records else 0.0

    def row(self) -> dict:
        return {
            "config": self.config,
            "seed": self.seed,
            "acceptance": self.acceptance_ratio,
            "rtc_sum": self.revenue_cost_ratio,
            "rtc_mean": self.mean_slice_rtc,
            "accepted": self.accepted,
            "arrived": self.arrived,
            "mean_ms_per_slice": self.mean_ms_per_slice,
        }


def slice_rng(seed: int, slice_id: int) -> np.random.Generator:
    return np.random.default_rng([seed, slice_id])


def run_scenario(scenario: Scenario, cfg: AlgoConfig, seed: int, name: str | None = None,
                 net: PhysicalNetwork | None = None) -> SimulationReport:
    """Replay arrivals and departures in time order, embedding each arrival.

    Departures sharing a timestamp with an arrival are processed first. The
    scenario substrate is copied, so the input is left untouched unless
    ``net`` is supplied explicitly.
    """
    net = scenario.substrate.copy() if net is None else net
    report = SimulationReport(name or cfg.algo, seed)
    # (time, kind, id) with departures (kind 0) before arrivals (kind 1)
    events = [(s.t_arrive, 1, s.id) for s in scenario.requests]
    heapq.heapify(events)
    by_id = {s.id: s for s in scenario.requests}
    start = time.perf_counter()
    while events:
        t, kind, sid = heapq.heappop(events)
        if kind == 0:
            release_embedding(net, sid)
            continue
        s = by_id[sid]
        t0 = time.perf_counter()
        ok, emb = main_place(net, s, cfg, slice_rng(seed, sid))
        ms = (time.perf_counter() - t0) * 1e3
        if ok:
            report.records.append(SliceRecord(sid, True, emb.reward, revenue(s),
                                              cost(s, emb.link_map), ms, emb.hosts, emb.link_map))
            if math.isfinite(s.t_depart):
                heapq.heappush(events, (s.t_depart, 0, sid))
        else:
            report.records.append(SliceRecord(sid, False, 0.0, revenue(s), 0, ms))
    report.runtime_s = time.perf_counter() - start
    return report


@dataclass(frozen=True)
class Interval:
    mean: float
    half_width: float

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width


def confidence_interval(values, z: float = Z_99) -> Interval:
    """Normal-approximation interval ``mean ± z·s/√n`` with the sample std."""
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two runs for an interval")
    return Interval(float(x.mean()), float(z * x.std(ddof=1) / math.sqrt(len(x))))


def _run_job(job):
    scenario, cfg, seed, name = job
    return run_scenario(scenario, cfg, seed, name)


def run_batch(scenarios: dict[int, Scenario] | Scenario, configs: dict[str, AlgoConfig],
              seeds, jobs: int = 1) -> list[SimulationReport]:
    """Every (config, seed) pair; ``scenarios`` may map seed -> scenario."""
    pick = (lambda s: scenarios[s]) if isinstance(scenarios, dict) else (lambda s: scenarios)
    work = [(pick(s), cfg, s, name) for name, cfg in configs.items() for s in seeds]
    if jobs <= 1:
        return [_run_job(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_job, work))


def aggregate(reports: list[SimulationReport]) -> dict[str, dict[str, Interval]]:
    out: dict[str, dict[str, Interval]] = {}
    names = sorted({r.config for r in reports})
    for name in names:
        rows = sorted((r for r in reports if r.config == name), key=lambda r: r.seed)
        if len(rows) < 2:
            continue
        out[name] = {
            "acceptance": confidence_interval([r.acceptance_ratio for r in rows]),
            "rtc_sum": confidence_interval([r.revenue_cost_ratio for r in rows]),
            "rtc_mean": confidence_interval([r.mean_slice_rtc for r in rows]),
        }
    return out


RESULT_COLUMNS = ["config", "seed", "acceptance", "rtc_sum", "rtc_mean", "accepted",
                  "arrived", "mean_ms_per_slice"]
SLICE_COLUMNS = ["config", "seed", "slice", "accepted", "reward", "revenue", "cost", "wall_ms"]


def write_results_csv(reports: list[SimulationReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS)
        w.writeheader()
        for r in reports:
            w.writerow(r.row())


def write_slices_csv(reports: list[SimulationReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SLICE_COLUMNS)
        for r in reports:
            for rec in r.records:
                w.writerow([r.config, r.seed, rec.id, int(rec.accepted), rec.reward,
                            rec.revenue, rec.cost, f"{rec.wall_ms:.3f}"])


def release_all(net: PhysicalNetwork) -> None:
    for sid in list(net.live):
        release_embedding(net, sid)


def _check_embedding(cap_edges, n_nodes: int, s: SliceRequest, hosts, link_map) -> list[str]:
    bad = []
    if hosts is None or link_map is None or len(hosts) != s.n_nodes or len(link_map) != s.n_edges:
        return [f"slice {s.id}: incomplete embedding"]
    if len(set(hosts)) != len(hosts):
        bad.append(f"slice {s.id}: separation violated, hosts {hosts}")
    if any(not 0 <= h < n_nodes for h in hosts):
        bad.append(f"slice {s.id}: unknown host")
        return bad
    for k, ((a, b, _), path) in enumerate(zip(s.vedges, link_map)):
        at = hosts[a]
        for e in path:
            if not 0 <= e < len(cap_edges):
                bad.append(f"slice {s.id}: vedge {k} uses unknown edge {e}")
                break
            u, v = cap_edges[e]
            if at == u:
                at = v
            elif at == v:
                at = u
            else:
                bad.append(f"slice {s.id}: vedge {k} path broken at edge {e}")
                break
        else:
            if at != hosts[b]:
                bad.append(f"slice {s.id}: vedge {k} path does not reach its endpoint")
    return bad


def embedding_violations(net: PhysicalNetwork, s: SliceRequest, hosts, link_map) -> list[str]:
    """Constraint violations of one embedding against the current residuals of ``net``."""
    bad = _check_embedding(net.edges, net.n_nodes, s, hosts, link_map)
    if bad:
        return bad
    cpu = list(net.cpu_occupied)
    bw = list(net.bw_occupied)
    for v, h in enumerate(hosts):
        cpu[h] += s.cpu[v]
    for (_, _, d), path in zip(s.vedges, link_map):
        for e in path:
            bw[e] += d
    bad += [f"slice {s.id}: CPU overflow on node {j}"
            for j, (c, cap) in enumerate(zip(cpu, net.cpu_capacity)) if c > cap]
    bad += [f"slice {s.id}: BW overflow on edge {e}"
            for e, (b, cap) in enumerate(zip(bw, net.bw_capacity)) if b > cap]
    return bad


def feasibility_oracle(net_initial: PhysicalNetwork, scenario: Scenario,
                       report: SimulationReport) -> list[str]:
    """Replay accepted embeddings over the timeline with plain counters.

    Returns the list of violations; empty means the run was feasible.
    """
    by_id = {s.id: s for s in scenario.requests}
    cpu_cap = list(net_initial.cpu_capacity)
    bw_cap = list(net_initial.bw_capacity)
    edges = list(net_initial.edges)
    cpu = [0] * len(cpu_cap)
    bw = [0] * len(bw_cap)
    violations: list[str] = []
    timeline = []
    for rec in report.records:
        if rec.accepted:
            s = by_id[rec.id]
            timeline.append((s.t_arrive, 1, rec.id, rec))
            if math.isfinite(s.t_depart):
                timeline.append((s.t_depart, 0, rec.id, rec))
    timeline.sort(key=lambda x: x[:3])
    for _, kind, sid, rec in timeline:
        s = by_id[sid]
        sign = 1 if kind == 1 else -1
        if kind == 1:
            violations += _check_embedding(edges, len(cpu_cap), s, rec.hosts, rec.link_map)
            if rec.hosts is None or rec.link_map is None:
                continue
        for v, h in enumerate(rec.hosts):
            if 0 <= h < len(cpu):
                cpu[h] += sign * s.cpu[v]
        for (_, _, d), path in zip(s.vedges, rec.link_map):
            for e in path:
                if 0 <= e < len(bw):
                    bw[e] += sign * d
        if kind == 1:
            violations += [f"slice {sid}: CPU overflow on node {j}"
                           for j in range(len(cpu)) if cpu[j] > cpu_cap[j]]
            violations += [f"slice {sid}: BW overflow on edge {e}"
                           for e in range(len(bw)) if bw[e] > bw_cap[e]]
    return violations

