import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mectopo.baselines import dijkstra_prune, lbas, leach_c, shortest_path_tree, unequal
from mectopo.harness import generate_scenario
from mectopo.model import build_network, make_scenario
from mectopo.topology import check_tree

BUILDERS = [unequal, leach_c, lbas, dijkstra_prune]


def build(positions, f, xi, snr=30.0):
    sc = make_scenario(positions, f, snr_db=snr, comm_range_m=xi)
    return sc, build_network(sc)


def layout(tree):
    return {c.head: c.members for c in tree.clusters}


# master below two heads that cannot hear each other; server 3 is out of the
# master's range and exactly equidistant from both heads
DIAMOND = [(0, -10), (12, 0), (-12, 0), (0, 10)]


def test_unequal_stronger_server_wins_conflict():
    sc, net = build([(0, 0), (8, 0), (-5, 0)], [1.0, 5.0, 9.0], 15.0)
    tree = unequal(sc, net)
    assert layout(tree) == {2: (1,)}


def test_unequal_tie_goes_to_lower_id():
    sc, net = build(DIAMOND, [1.0, 4.0, 4.0, 2.0], 17.0)
    assert net.distances[3, 1] == net.distances[3, 2]
    assert layout(unequal(sc, net)) == {1: (3,), 2: ()}


@pytest.mark.parametrize("fn", BUILDERS)
def test_no_neighbors_master_only(fn):
    sc, net = build([(0, 0), (30, 0), (35, 0)], [1.0, 2.0, 3.0], 10.0)
    tree = fn(sc, net)
    assert tree.clusters == ()
    assert tree.makespan == sc.task_size * sc.gamma[0]


def test_leach_c_full_fraction():
    sc = generate_scenario(2, 30)
    net = build_network(sc)
    tree = leach_c(sc, net, ch_fraction=1.0)
    assert set(tree.heads) == set(net.neighbors(0))


def test_leach_c_top_two_of_five():
    pos = [(0, 0), (5, 0), (0, 5), (-5, 0), (0, -5), (3, 3)]
    f = [1.0, 2.0, 8.0, 3.0, 9.0, 1.5]
    sc, net = build(pos, f, 10.0)
    assert len(net.neighbors(0)) == 5
    tree = leach_c(sc, net, ch_fraction=0.4)
    expected = sorted(sorted(range(1, 6), key=lambda i: -f[i])[:2])
    assert list(tree.heads) == expected == [2, 4]


def test_leach_c_signal_tie_goes_to_lower_id():
    sc, net = build(DIAMOND, [1.0, 4.0, 4.0, 2.0], 17.0)
    tree = leach_c(sc, net, ch_fraction=1.0)
    assert layout(tree) == {1: (3,), 2: ()}


def test_leach_c_joins_strongest_signal():
    snr = np.full((4, 4), 30.0)
    snr[3, 2] = snr[2, 3] = 40.0
    sc, net = build(DIAMOND, [1.0, 4.0, 4.0, 2.0], 17.0, snr=snr)
    assert layout(leach_c(sc, net, ch_fraction=1.0)) == {1: (), 2: (3,)}


@pytest.mark.parametrize("frac", [0.0, -0.1, 1.5])
def test_leach_c_fraction_validated(frac):
    sc, net = build(DIAMOND, [1.0, 4.0, 4.0, 2.0], 17.0)
    with pytest.raises(ValueError):
        leach_c(sc, net, ch_fraction=frac)


def test_lbas_single_candidate():
    sc, net = build([(0, 0), (5, 0), (14, 0)], [1.0, 2.0, 3.0], 10.0)
    assert layout(lbas(sc, net)) == {1: (2,)}


def test_lbas_prefers_closer_candidate():
    sc, net = build([(0, 0), (5, 0), (-8, 0)], [1.0, 3.0, 3.0], 15.0)
    assert layout(lbas(sc, net)) == {1: (2,)}


def test_lbas_head_with_consumed_neighbors():
    sc, net = build([(0, 0), (10, 0), (0, 10), (10, 10)], [1.0, 9.0, 1.0, 2.0], 12.0)
    assert not net.adjacency[1, 2] and not net.adjacency[0, 3]
    assert layout(lbas(sc, net)) == {1: (3,), 2: ()}


def test_dijkstra_path_graph():
    sc, net = build([(0, 0), (10, 0), (20, 0), (30, 0)], [1.0] * 4, 12.0)
    assert layout(dijkstra_prune(sc, net)) == {1: (2,)}


def test_dijkstra_relay_beats_weak_direct_link():
    snr = np.full((3, 3), 30.0)
    snr[0, 2] = snr[2, 0] = 10.0
    sc, net = build([(0, 0), (10, 0), (19, 3)], [1.0] * 3, 20.0, snr=snr)
    assert net.adjacency[0, 2]
    g = nx.Graph()
    for i, j in net.edges():
        g.add_edge(i, j, weight=float(net.unit_delay[i, j]))
    assert nx.shortest_path(g, 0, 2, weight="weight") == [0, 1, 2]
    assert layout(dijkstra_prune(sc, net)) == {1: (2,)}


@pytest.mark.parametrize("seed", range(8))
def test_shortest_path_distances_match_networkx(seed):
    sc = generate_scenario(seed, 40)
    net = build_network(sc)
    dist, parent = shortest_path_tree(net)
    g = nx.Graph()
    g.add_nodes_from(range(net.n))
    for i, j in net.edges():
        g.add_edge(i, j, weight=float(net.unit_delay[i, j]))
    ref = nx.single_source_dijkstra_path_length(g, 0, weight="weight")
    assert set(dist) == set(ref)
    for v, d in ref.items():
        assert dist[v] == pytest.approx(d, rel=1e-12)
    for v, p in parent.items():
        assert dist[v] == pytest.approx(dist[p] + net.unit_delay[p, v], rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 60), xi=st.floats(0, 140))
def test_baseline_invariants(seed, n, xi):
    sc = generate_scenario(seed, n, comm_range_m=xi)
    net = build_network(sc)
    reach = set(net.neighbors(0))
    for h in net.neighbors(0):
        reach.update(net.neighbors(h))
    reach.add(0)
    for fn in BUILDERS:
        tree = fn(sc, net)
        check_tree(tree, net, sc.task_size)
        assert set(tree.servers) <= reach
        again = fn(sc, build_network(sc))
        assert again.to_dict() == tree.to_dict()


def test_baselines_offload_to_every_reachable_server():
    sc = generate_scenario(7, 40)
    net = build_network(sc)
    for fn in (unequal, leach_c):
        tree = fn(sc, net)
        covered = set(tree.servers)
        for h in tree.heads:
            assert set(net.neighbors(h)) <= covered
