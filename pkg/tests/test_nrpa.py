import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from vnesearch.mdp import CandidateTable, MdpState
from vnesearch.network import PhysicalNetwork, SliceRequest
from vnesearch.nrpa import (
    IllegalSequence,
    Policy,
    SearchContext,
    adapt,
    expected_adaptations,
    expected_simulations,
    gibbs_sample,
    nested_search,
    nrpa_search,
    simulate,
    softmax,
    weight_init,
)

from conftest import random_instance


def test_weight_init_example(five_node_net):
    d = five_node_net.distance
    state = MdpState((2,), (0, 0, 1, 0, 2))
    assert weight_init(state, 3, d, 5) == -1.5
    assert weight_init(state, 1, d, 5) == -1.0
    assert weight_init(state, 0, d, 5) == -2.5
    assert weight_init(MdpState((0,), (0,) * 5), 2, d, 5) == 0.2


def test_context_init_matches_weight_init(five_node_net):
    s = SliceRequest(0, (1, 1, 1), ((0, 1, 1), (1, 2, 1)))
    ctx = SearchContext(five_node_net, s, CandidateTable.unpruned(five_node_net, s))
    weights = Policy().state_weights(ctx, [2, 4])
    assert weights == {0: -2.5, 1: -1.0, 3: -1.5}
    assert set(Policy().state_weights(ctx, []).values()) == {0.2}


def test_softmax_shift_invariant():
    w = np.array([0.3, -1.0, 2.0])
    assert np.allclose(softmax(w), softmax(w + 17.0))
    assert softmax(np.array([0.0, math.log(3)])) == pytest.approx([0.25, 0.75])


def test_gibbs_single_action():
    rng = np.random.default_rng(0)
    assert all(gibbs_sample(np.array([4]), np.array([-50.0]), rng) == 4 for _ in range(20))


def test_gibbs_frequencies_chi_square():
    rng = np.random.default_rng(7)
    actions = np.array([0, 1, 2])
    w = np.array([0.0, math.log(3), math.log(6)])
    draws = [gibbs_sample(actions, w, rng) for _ in range(10_000)]
    counts = np.bincount(draws, minlength=3)
    expected = softmax(w) * len(draws)
    assert chisquare(counts, expected).pvalue > 1e-3
    assert np.allclose(counts / len(draws), softmax(w), atol=0.02)


def _line_ctx(init="zero"):
    # two vnodes on a three-node path; every placement of distinct nodes is legal
    net = PhysicalNetwork([10, 10, 10], [(0, 1, 10), (1, 2, 10)])
    s = SliceRequest(0, (1, 1), ((0, 1, 1),))
    return SearchContext(net, s, CandidateTable.unpruned(net, s), init=init)


def test_simulate_frequencies_match_softmax():
    ctx = _line_ctx()
    rng = np.random.default_rng(3)
    pol = Policy({(): np.array([0.0, math.log(2), 0.0])})
    first = [simulate(ctx, pol, rng).seq[0] for _ in range(10_000)]
    freq = np.bincount(first, minlength=3) / len(first)
    assert np.allclose(freq, [0.25, 0.5, 0.25], atol=0.02)


def test_simulate_deterministic_under_seed():
    net, s, _ = random_instance(5)
    ctx = SearchContext(net, s)
    a = simulate(ctx, Policy(), np.random.default_rng(11))
    b = simulate(ctx, Policy(), np.random.default_rng(11))
    assert a == b


def test_simulate_without_hosts_fails_immediately():
    net = PhysicalNetwork([1, 1], [(0, 1, 5)])
    s = SliceRequest(0, (5, 1), ((0, 1, 1),))
    ctx = SearchContext(net, s, CandidateTable.unpruned(net, s))
    r = simulate(ctx, Policy(), np.random.default_rng(0))
    assert r.reward == 0 and r.link_map is None and r.seq == ()


def test_adapt_two_equal_actions():
    ctx = _line_ctx()
    pol = Policy({(): np.array([0.0, 0.0, 5.0])})
    # restrict to the states reached by seq (0, 1): step 1 legal actions are {1, 2}
    new = adapt(ctx, pol, (0, 1))
    w1 = new.table[(0,)]
    assert w1 == pytest.approx([0.5, -0.5])
    assert pol.table[()] is not new.table[()]
    assert np.array_equal(pol.table[()], [0.0, 0.0, 5.0])


def test_adapt_single_action_is_net_zero():
    net = PhysicalNetwork([10, 10], [(0, 1, 10)])
    s = SliceRequest(0, (1,), ())
    ctx = SearchContext(net, s, CandidateTable.unpruned(net, s, order=[0]), init="zero")
    ctx.step_candidates[0] = np.array([1])
    new = adapt(ctx, Policy(), (1,))
    assert new.table[()] == pytest.approx([0.0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=2, max_size=8), st.data())
def test_adapt_decrement_sums_to_alpha(weights, data):
    k = len(weights)
    net = PhysicalNetwork([10] * k, [(i, i + 1, 10) for i in range(k - 1)])
    s = SliceRequest(0, (1,), ())
    ctx = SearchContext(net, s, CandidateTable.unpruned(net, s), init="zero")
    w = np.array(weights)
    a = data.draw(st.integers(0, k - 1))
    new = adapt(ctx, Policy({(): w}), (a,))
    delta = new.table[()] - w
    assert delta.sum() == pytest.approx(0.0, abs=1e-9)
    assert delta[a] == pytest.approx(1 - softmax(w)[a])


def test_adapt_rejects_illegal_sequence():
    ctx = _line_ctx()
    with pytest.raises(IllegalSequence):
        adapt(ctx, Policy(), (0, 0))
    with pytest.raises(IllegalSequence):
        adapt(ctx, Policy(), (0, 1, 2))


def test_weights_stay_clamped():
    ctx = _line_ctx()
    pol = Policy({(): np.array([99.9, -99.9, 0.0])})
    for _ in range(5):
        pol = adapt(ctx, pol, (0, 1))
    assert pol.table[()].max() <= 100 and pol.table[()].min() >= -100


@pytest.mark.parametrize("n_iter,level", [(1, 0), (3, 1), (3, 2), (2, 3)])
def test_counting_laws(n_iter, level):
    net, s, _ = random_instance(1)
    ctx = SearchContext(net, s)
    nrpa_search(ctx, level, n_iter, rng=np.random.default_rng(0))
    assert ctx.stats.simulations == expected_simulations(n_iter, level)
    assert ctx.stats.adaptations == expected_adaptations(n_iter, level)
    if level:
        assert ctx.stats.adaptations_by_level[1] == n_iter ** level


def test_best_is_max_of_leaves(monkeypatch):
    import vnesearch.nrpa as nrpa_mod
    net, s, _ = random_instance(2)
    ctx = SearchContext(net, s)
    leaves = []
    real = nrpa_mod.simulate

    def spy(*a):
        r = real(*a)
        leaves.append(r.reward)
        return r

    monkeypatch.setattr(nrpa_mod, "simulate", spy)
    best = nested_search(ctx, 2, 4, Policy(), np.random.default_rng(1))
    assert best.reward == max(leaves)


def test_policy_not_leaked_between_levels():
    net, s, _ = random_instance(3)
    ctx = SearchContext(net, s)
    pol = Policy()
    nested_search(ctx, 2, 3, pol, np.random.default_rng(0))
    assert pol.table == {}
