import itertools

import networkx as nx
import pytest
from hypothesis import given, settings

from helpers import cycle, networks, path, star, to_nx, trees
from ncgame.graph import (
    INF,
    IndexOutOfRange,
    NotATree,
    OwnedNetwork,
    SelfLoop,
    all_pairs_distances,
    biconnected_components,
    build_network,
    centroids,
    distcost,
    shortest_path,
    sum_distance_to_set,
)


class TestBuildNetwork:
    def test_single_isolated_agent(self):
        net = build_network(1, [])
        assert net.n == 1 and net.edges == () and net.is_connected

    def test_path_owners(self):
        net = build_network(3, [(0, 1), (1, 2)])
        assert net.edges == ((0, 1), (1, 2))
        assert net.owners(0, 1) == (0,) and net.owners(1, 2) == (1,)

    def test_star_center_owns_all(self):
        net = star(4)
        assert net.strategies[0] == {1, 2, 3}
        assert all(not net.strategies[i] for i in (1, 2, 3))

    def test_duplicates_collapse(self):
        net = build_network(2, [(0, 1), (0, 1)])
        assert net.bought_edges == [(0, 1)]

    def test_both_endpoints_may_buy(self):
        net = build_network(2, [(0, 1), (1, 0)])
        assert net.owners(0, 1) == (0, 1)
        assert net.edges == ((0, 1),)
        assert net.purchases == 2

    @pytest.mark.parametrize("edge", [(0, 3), (-1, 0), (5, 1)])
    def test_index_out_of_range(self, edge):
        with pytest.raises(IndexOutOfRange):
            build_network(3, [edge])

    def test_self_loop(self):
        with pytest.raises(SelfLoop):
            build_network(3, [(1, 1)])

    def test_relabel_preserves_ownership(self):
        net = build_network(3, [(0, 1), (1, 2)])
        moved = net.relabel([2, 0, 1])
        assert moved.owners(2, 0) == (2,) and moved.owners(0, 1) == (0,)


class TestDistances:
    def test_path(self):
        assert all_pairs_distances(path(3))[0, 2] == 2

    def test_disconnected(self):
        assert all_pairs_distances(build_network(2, []))[0, 1] is INF

    def test_five_cycle_antipodes(self):
        dist = all_pairs_distances(cycle(5))
        assert all(dist[u, (u + 2) % 5] == 2 for u in range(5))
        assert max(max(r) for r in dist.rows()) == 2

    def test_distcost_examples(self):
        assert distcost(path(3), 1) == 2
        assert distcost(star(4), 0) == 3
        assert distcost(star(4), 1) == 5
        assert distcost(build_network(2, []), 0) is INF

    def test_sum_distance_to_set(self):
        assert sum_distance_to_set(path(3), 0, []) == 0
        assert sum_distance_to_set(path(3), 0, [1, 2]) == 3
        assert sum_distance_to_set(star(4), 1, [2, 3]) == 4
        assert sum_distance_to_set(build_network(3, [(0, 1)]), 0, [2]) is INF

    def test_shortest_path_avoiding_edge(self):
        net = cycle(5)
        assert shortest_path(net.adj, 0, 1) == [0, 1]
        assert shortest_path(net.adj, 0, 1, banned=[(0, 1)]) == [0, 4, 3, 2, 1]
        assert shortest_path(path(3).adj, 0, 2, banned=[(1, 2)]) is None

    def test_infinity_absorbs(self):
        assert INF + 3 is INF
        assert INF > 10 ** 9 and not INF < 5
        assert 7 < INF


@settings(max_examples=150, deadline=None)
@given(networks())
def test_distances_match_networkx(net):
    dist = all_pairs_distances(net)
    ref = dict(nx.all_pairs_shortest_path_length(to_nx(net)))
    for a in range(net.n):
        assert dist[a, a] == 0
        for b in range(net.n):
            assert dist[a, b] == ref[a].get(b, INF)
            assert dist[a, b] == dist[b, a]


@settings(max_examples=100, deadline=None)
@given(networks(min_n=3, connected=True))
def test_triangle_inequality(net):
    dist = all_pairs_distances(net)
    for a, b, c in itertools.product(range(net.n), repeat=3):
        assert dist[a, c] <= dist[a, b] + dist[b, c]


@settings(max_examples=150, deadline=None)
@given(networks(min_n=2, connected=True))
def test_distcost_identities(net):
    dist = all_pairs_distances(net)
    pairs = sum(dist[a, b] for a in range(net.n) for b in range(a + 1, net.n))
    assert sum(distcost(net, u) for u in range(net.n)) == 2 * pairs
    for u in range(net.n):
        assert distcost(net, u) >= net.n - 1
        full = bin(net.adj[u]).count("1") == net.n - 1
        assert (distcost(net, u) == net.n - 1) == full


class TestBiconnected:
    def test_tree_has_none(self):
        assert biconnected_components(path(6)) == []
        assert biconnected_components(star(5)) == []

    def test_five_cycle_is_one_component(self):
        (block,) = biconnected_components(cycle(5))
        assert block.vertices == set(range(5)) and block.is_cycle()

    def test_bowtie(self):
        net = build_network(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)])
        blocks = biconnected_components(net)
        assert sorted(sorted(b.vertices) for b in blocks) == [[0, 1, 2], [2, 3, 4]]

    def test_bridges_excluded(self):
        net = build_network(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)])
        (block,) = biconnected_components(net)
        assert block.edges == {(0, 1), (1, 2), (0, 2)}


def _share_a_cycle(g: nx.Graph, a: int, b: int) -> bool:
    if g.has_edge(a, b):
        h = g.copy()
        h.remove_edge(a, b)
        return nx.has_path(h, a, b)
    return nx.node_connectivity(g, a, b) >= 2


@settings(max_examples=100, deadline=None)
@given(networks(min_n=3, max_n=7))
def test_blocks_match_networkx(net):
    g = to_nx(net)
    ours = sorted(sorted(b.edges) for b in biconnected_components(net))
    ref = sorted(
        sorted((min(e), max(e)) for e in comp)
        for comp in nx.biconnected_component_edges(g)
        if len(comp) > 1
    )
    assert ours == ref
    for block in biconnected_components(net):
        for a, b in itertools.combinations(sorted(block.vertices), 2):
            assert _share_a_cycle(g, a, b)


class TestCentroids:
    def test_paths(self):
        assert centroids(path(5)).centroids == (2,)
        assert centroids(path(4)).centroids == (1, 2)

    def test_star(self):
        report = centroids(star(6))
        assert report.centroids == (0,)
        assert report.subtree_sizes[0] == (1, 1, 1, 1, 1)

    def test_not_a_tree(self):
        with pytest.raises(NotATree):
            centroids(cycle(4))
        with pytest.raises(NotATree):
            centroids(build_network(3, [(0, 1)]))


@settings(max_examples=200, deadline=None)
@given(trees())
def test_centroid_properties(net):
    report = centroids(net)
    cs = report.centroids
    assert 1 <= len(cs) <= 2
    if len(cs) == 2:
        assert net.has_edge(*cs)
    for c in cs:
        assert all(s <= net.n // 2 for s in report.subtree_sizes[c])
    g = to_nx(net)
    for v in range(net.n):
        h = g.copy()
        h.remove_node(v)
        biggest = max((len(c) for c in nx.connected_components(h)), default=0)
        assert (v in cs) == (2 * biggest <= net.n)


def test_owned_network_is_hashable_value():
    a = build_network(3, [(0, 1)])
    b = OwnedNetwork(3, (frozenset({1}), frozenset(), frozenset()))
    assert a == b and hash(a) == hash(b)
