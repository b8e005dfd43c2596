import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vnesearch.mdp import CandidateTable
from vnesearch.network import PhysicalNetwork, SliceRequest
from vnesearch.nrpa import SearchContext
from vnesearch.simulator import embedding_violations
from vnesearch.uct import UctTree, uct_search

from conftest import random_instance


def _walk(node):
    yield node
    for child in node.children.values():
        yield from _walk(child)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 120))
def test_budget_and_backprop_invariants(seed, budget):
    net, s, rng = random_instance(seed)
    ctx = SearchContext(net, s)
    tree = UctTree(ctx, rng=rng)
    best = tree.run(budget)
    assert budget <= tree.spent <= budget + max(s.n_edges, 1)
    assert ctx.stats.bfs_calls <= budget + s.n_edges
    assert tree.root.visit_count == len(tree.leaf_rewards)
    assert tree.root.mean == pytest.approx(np.mean(tree.leaf_rewards))
    for node in _walk(tree.root):
        assert node.visit_count >= sum(c.visit_count for c in node.children.values())
    assert best.reward == max(tree.leaf_rewards)
    if best.reward > 0:
        assert embedding_violations(net, s, ctx.hosts_of(best.seq), best.link_map) == []


def test_single_action_chain_is_deterministic():
    net = PhysicalNetwork([10, 10, 1], [(0, 1, 10), (1, 2, 10)])
    s = SliceRequest(0, (5, 5), ((0, 1, 3),))
    table = CandidateTable((np.array([0]), np.array([1])), (0, 1))
    for c in (0.0, 1.4, 50.0):
        best = uct_search(SearchContext(net, s, table), budget=10, c=c,
                          rng=np.random.default_rng(0))
        assert best.seq == (0, 1) and best.reward == 1.0


def test_unvisited_children_expanded_before_revisits():
    net = PhysicalNetwork([10] * 4, [(0, 1, 10), (1, 2, 10), (2, 3, 10)])
    s = SliceRequest(0, (1,), ())
    ctx = SearchContext(net, s, CandidateTable.unpruned(net, s))
    tree = UctTree(ctx, rng=np.random.default_rng(0))
    for i in range(4):
        tree.iterate()
        assert len(tree.root.children) == i + 1
        assert all(ch.visit_count == 1 for ch in tree.root.children.values())


def test_no_success_means_rejection():
    net = PhysicalNetwork([10, 10], [(0, 1, 1)])
    s = SliceRequest(0, (1, 1), ((0, 1, 5),))
    best = uct_search(SearchContext(net, s, CandidateTable.unpruned(net, s)), budget=5,
                      rng=np.random.default_rng(0))
    assert best.reward == 0 and best.link_map is None


def test_budget_must_be_positive():
    net, s, _ = random_instance(0)
    with pytest.raises(ValueError):
        uct_search(SearchContext(net, s), budget=0)
