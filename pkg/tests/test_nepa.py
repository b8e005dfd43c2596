import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vnesearch.mdp import CandidateTable
from vnesearch.nepa import (
    RefineConfig,
    candidate_hosts,
    improvement_score,
    nepa_search,
    refine,
    refine_rollout,
)
from vnesearch.network import PhysicalNetwork, SliceRequest
from vnesearch.nrpa import (
    Policy,
    RolloutResult,
    SearchContext,
    expected_simulations,
    nrpa_search,
    simulate,
)
from vnesearch.simulator import embedding_violations

from conftest import random_instance


def test_improvement_scores(refine_instance):
    _, s, _, _, lm = refine_instance
    assert [improvement_score(v, lm, s) for v in range(3)] == [12.5, 17.5, 25.0]


def test_improvement_score_skips_isolated_and_scales():
    s = SliceRequest(0, (1, 1, 1), ((0, 1, 4),))
    assert improvement_score(2, ((7, 8),), s) is None
    assert improvement_score(0, ((7,),), s) == 4
    s2 = SliceRequest(0, (1, 1, 1), ((0, 1, 8),))
    assert improvement_score(0, ((7, 8),), s2) == 2 * improvement_score(0, ((7, 8),), s)


def test_candidates_ranked_by_distance(refine_instance):
    _, s, ctx, hosts, _ = refine_instance
    # 1-based nodes 2 (mean distance 1) then 4 (mean distance 1.5)
    assert candidate_hosts(ctx.dist, hosts, 2, 2, ctx.residual_cpu, 10) == [1, 3]
    assert candidate_hosts(ctx.dist, hosts, 2, 99, ctx.residual_cpu, 10) == [1, 3]
    assert candidate_hosts(ctx.dist, hosts, 2, 1, ctx.residual_cpu, 10) == [1]
    cpu = list(ctx.residual_cpu)
    cpu[1] = 5
    assert candidate_hosts(ctx.dist, hosts, 2, 2, cpu, 10) == [3]


def test_refine_picks_cheapest_move(refine_instance):
    net, s, ctx, hosts, lm = refine_instance
    start = RolloutResult(ctx.score(hosts, lm), hosts, lm)
    out, _ = refine_rollout(ctx, start, RefineConfig(k=2, x=1))
    assert out.seq == (2, 4, 1)
    bw_used = sum(bw * len(p) for (_, _, bw), p in zip(s.vedges, out.link_map))
    assert bw_used == 25
    assert out.reward == 1.0
    assert ctx.stats.refine_evaluations == 2


def test_refine_leaves_optimal_embedding_alone():
    net = PhysicalNetwork([9, 9, 9], [(0, 1, 9), (1, 2, 9), (0, 2, 9)])
    s = SliceRequest(0, (1, 1), ((0, 1, 3),))
    ctx = SearchContext(net, s, CandidateTable.unpruned(net, s))
    start = RolloutResult(1.0, (0, 1), ((0,),))
    assert refine(ctx, start, RefineConfig()) is start


def test_refine_config_validation():
    with pytest.raises(ValueError):
        RefineConfig(k=0)
    with pytest.raises(ValueError):
        RefineConfig(x=0)


def _successful_rollout(ctx, rng, tries=50):
    for _ in range(tries):
        r = simulate(ctx, Policy(), rng)
        if r.reward > 0:
            return r
    return None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6))
def test_refine_monotone_and_feasible(seed, k):
    net, s, rng = random_instance(seed)
    net.bw_occupied = [int(x) for x in rng.integers(0, np.array(net.bw_capacity) // 2 + 1)]
    ctx = SearchContext(net, s)
    start = _successful_rollout(ctx, rng)
    if start is None:
        return
    out = refine(ctx, start, RefineConfig(k=k))
    assert out.reward >= start.reward
    hosts = ctx.hosts_of(out.seq)
    assert embedding_violations(net, s, hosts, out.link_map) == []
    assert out.reward == pytest.approx(ctx.score(hosts, out.link_map))


def test_disabled_refinement_is_plain_nrpa():
    net, s, _ = random_instance(9)
    a = nepa_search(SearchContext(net, s), 2, 4, RefineConfig(l_prime=5),
                    rng=np.random.default_rng(4))
    b = nrpa_search(SearchContext(net, s), 2, 4, rng=np.random.default_rng(4))
    assert a == b


@pytest.mark.parametrize("n_iter,level,l_prime", [(3, 2, 1), (3, 2, 2), (4, 3, 2)])
def test_refinement_does_not_change_simulation_count(n_iter, level, l_prime):
    net, s, _ = random_instance(10)
    ctx = SearchContext(net, s)
    cfg = RefineConfig(k=4, l_prime=l_prime)
    nepa_search(ctx, level, n_iter, cfg, rng=np.random.default_rng(0))
    assert ctx.stats.simulations == expected_simulations(n_iter, level)
    # one refine per iteration at level l', at most
    assert ctx.stats.refines <= n_iter ** (level - l_prime + 1)
    x = s.n_nodes
    assert ctx.stats.refine_evaluations <= ctx.stats.refines * cfg.k * x
    bound = n_iter ** level * s.n_edges + ctx.stats.refines * cfg.k * x * s.n_edges
    assert ctx.stats.bfs_calls <= bound


def test_nepa_result_link_map_is_stored_not_recomputed():
    net, s, _ = random_instance(12)
    ctx = SearchContext(net, s)
    best = nepa_search(ctx, 2, 3, RefineConfig(k=4), rng=np.random.default_rng(2))
    if best.reward > 0:
        hosts = ctx.hosts_of(best.seq)
        assert embedding_violations(net, s, hosts, best.link_map) == []
        assert ctx.score(hosts, best.link_map) == best.reward
