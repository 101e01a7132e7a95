import networkx as nx
from hypothesis import strategies as st

from ncgame.graph import OwnedNetwork, build_network


def path(n: int) -> OwnedNetwork:
    return build_network(n, [(i, i + 1) for i in range(n - 1)])


def star(n: int) -> OwnedNetwork:
    return build_network(n, [(0, i) for i in range(1, n)])


def cycle(n: int) -> OwnedNetwork:
    """Directed cycle: agent i buys the edge to i+1."""
    return build_network(n, [(i, (i + 1) % n) for i in range(n)])


def to_nx(net: OwnedNetwork) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(net.n))
    g.add_edges_from(net.edges)
    return g


@st.composite
def networks(draw, min_n=1, max_n=8, connected=False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    chosen = draw(st.lists(st.sampled_from(pairs), max_size=2 * n)) if pairs else []
    if connected:
        order = draw(st.permutations(range(n)))
        for i in range(1, n):
            j = draw(st.integers(0, i - 1))
            chosen.append((order[i], order[j]))
    return build_network(n, chosen)


@st.composite
def trees(draw, min_n=1, max_n=10):
    n = draw(st.integers(min_n, max_n))
    edges = []
    for i in range(1, n):
        j = draw(st.integers(0, i - 1))
        edges.append((i, j) if draw(st.booleans()) else (j, i))
    perm = draw(st.permutations(range(n)))
    return build_network(n, edges).relabel(perm)

