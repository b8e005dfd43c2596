import numpy as np
import pytest

from vnesearch.mdp import CandidateTable
from vnesearch.network import PhysicalNetwork, SliceRequest
from vnesearch.nrpa import SearchContext
from vnesearch.scenarios import gen_waxman, gen_slice, ScenarioConfig


def one_based(edges, bw=1000):
    return [(u - 1, v - 1, bw) for u, v in edges]


# five-node graph used by the distance-initialization and refinement examples
FIVE_NODE_EDGES = [(1, 4), (3, 4), (3, 5), (3, 2), (2, 5), (4, 2)]


@pytest.fixture
def five_node_net():
    return PhysicalNetwork([100] * 5, one_based(FIVE_NODE_EDGES))


@pytest.fixture
def refine_instance(five_node_net):
    """Three-vnode slice on hosts 3, 5, 1 (1-based) with one 3-hop and one 2-hop link."""
    net = five_node_net
    s = SliceRequest(0, (10, 10, 10), ((0, 1, 5), (1, 2, 10), (0, 2, 10)))
    e = lambda u, v: net.edge_id(u - 1, v - 1)
    hosts = (2, 4, 0)
    link_map = ((e(3, 5),), (e(5, 2), e(2, 4), e(4, 1)), (e(3, 4), e(4, 1)))
    ctx = SearchContext(net, s, CandidateTable.unpruned(net, s))
    return net, s, ctx, hosts, link_map


@pytest.fixture
def toy_mdp():
    """Four nodes, edges 1-4, 1-3, 2-3; slice CPU (10, 9, 14) with links v1-v2 bw 1, v2-v3 bw 2."""
    net = PhysicalNetwork([10, 5, 14, 10], one_based([(1, 4), (1, 3), (2, 3)], bw=10))
    s = SliceRequest(0, (10, 9, 14), ((0, 1, 1), (1, 2, 2)))
    return net, s


def random_instance(seed: int, n: int = 14, size=(3, 6)):
    rng = np.random.default_rng(seed)
    net = gen_waxman(n, 0.9, 0.4, (20, 60), (10, 40), rng)
    cfg = ScenarioConfig(slice_size=size, cpu_demand=(1, 20), bw_demand=(1, 15))
    return net, gen_slice(0, cfg, rng), rng


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
