"""Per-slice placement: build the search, run it, commit on success."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .mdp import REWARDS, Embedding, prune_candidates
from .nepa import RefineConfig, nepa_search
from .network import PhysicalNetwork, SliceRequest, commit_embedding
from .nrpa import Policy, RolloutResult, SearchContext, SearchStats, nested_search
from .uct import uct_search

ALGOS = ("nepa", "nepa-w", "nrpa", "nrpa-w", "uct")


@dataclass(frozen=True)
class AlgoConfig:
    """Search algorithm and its parameters.

    ``n_iter=None`` picks 5 for the refined variants and 7 for plain NRPA.
    """

    algo: str = "nepa"
    n_iter: int | None = None
    level: int = 3
    refine_level: int = 2
    k: int = 16
    x: int | None = None
    reward: str = "rc"
    budget: int = 445
    c: float = math.sqrt(2)

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {ALGOS}")
        if self.reward not in REWARDS:
            raise ValueError(f"unknown reward {self.reward!r}")
        if self.n_iter is not None and self.n_iter < 1:
            raise ValueError("n_iter must be >= 1")
        if self.level < 0 or self.budget < 1 or self.c < 0:
            raise ValueError("level >= 0, budget >= 1 and c >= 0 required")
        RefineConfig(self.k, self.x, max(self.refine_level, 0))

    @property
    def iterations(self) -> int:
        if self.n_iter is not None:
            return self.n_iter
        return 5 if self.algo.startswith("nepa") else 7

    @property
    def init(self) -> str:
        return "zero" if self.algo.endswith("-w") else "heuristic"

    @property
    def refine(self) -> RefineConfig | None:
        if not self.algo.startswith("nepa"):
            return None
        return RefineConfig(self.k, self.x, self.refine_level)

    def describe(self) -> dict:
        d = asdict(self)
        d["n_iter"] = self.iterations
        return d


def search(ctx: SearchContext, cfg: AlgoConfig, rng: np.random.Generator) -> RolloutResult:
    if cfg.algo == "uct":
        return uct_search(ctx, cfg.budget, cfg.c, rng)
    if cfg.refine is not None:
        return nepa_search(ctx, cfg.level, cfg.iterations, cfg.refine, Policy(), rng)
    return nested_search(ctx, cfg.level, cfg.iterations, Policy(), rng)


def main_place(net: PhysicalNetwork, slice_: SliceRequest, cfg: AlgoConfig,
               rng: np.random.Generator, stats: SearchStats | None = None
               ) -> tuple[bool, Embedding]:
    """Search an embedding for ``slice_`` and commit it to ``net`` when its reward is positive.

    The committed link map is the one stored with the best result, not a
    re-routing of its node placement.
    """
    table = prune_candidates(net, slice_)
    failed = Embedding((), table.order, None, 0.0)
    if slice_.n_nodes > net.n_nodes or table.rejectable or slice_.n_nodes == 0:
        return False, failed
    ctx = SearchContext(net, slice_, table, REWARDS[cfg.reward], cfg.init, stats)
    best = search(ctx, cfg, rng)
    emb = Embedding(best.seq, table.order, best.link_map, best.reward)
    if best.reward > 0 and best.link_map is not None:
        commit_embedding(net, slice_, emb.hosts, best.link_map)
        return True, emb
    return False, emb
