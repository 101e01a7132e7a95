"""Ownership-labelled networks, hop distances, biconnected components, centroids.

Vertices are the integers ``0..n-1``.  Adjacency is kept as one integer bitmask
per vertex, which keeps breadth-first search cheap for the small graphs the
analysis works with.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, total_ordering
from typing import Iterable, Sequence


class NetworkError(ValueError):
    pass


class IndexOutOfRange(NetworkError):
    pass


class SelfLoop(NetworkError):
    pass


class NotATree(NetworkError):
    pass


@total_ordering
class _Infinite:
    """Distance between vertices in different components.

    Absorbs addition and compares above every finite number.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "inf"

    def __eq__(self, other) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("ncgame.INF")

    def __lt__(self, other) -> bool:
        return False

    def __gt__(self, other) -> bool:
        return other is not self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __mul__(self, other):
        if other == 0:
            raise ArithmeticError("INF * 0 is undefined")
        return self

    __rmul__ = __mul__


INF = _Infinite()


def is_finite(x) -> bool:
    return x is not INF


def bits(mask: int) -> Iterable[int]:
    """Yield the set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bfs_distances(adj: Sequence[int], src: int) -> list[int | None]:
    """Hop distances from ``src``; ``None`` marks unreachable vertices."""
    n = len(adj)
    dist: list[int | None] = [None] * n
    dist[src] = 0
    seen = 1 << src
    frontier = seen
    d = 0
    while frontier:
        d += 1
        nxt = 0
        for x in bits(frontier):
            nxt |= adj[x]
        nxt &= ~seen
        for x in bits(nxt):
            dist[x] = d
        seen |= nxt
        frontier = nxt
    return dist


def bfs_sum(adj: Sequence[int], src: int, first: int, full: int) -> int | None:
    """Sum of hop distances from ``src`` when its neighbourhood is ``first``.

    ``adj[src]`` is ignored; the first BFS layer is exactly ``first``.  Returns
    ``None`` if the search does not reach every vertex of ``full``.
    """
    seen = (1 << src) | first
    frontier = first
    total = first.bit_count()
    d = 1
    while frontier:
        nxt = 0
        while frontier:
            low = frontier & -frontier
            nxt |= adj[low.bit_length() - 1]
            frontier ^= low
        nxt &= ~seen
        d += 1
        total += d * nxt.bit_count()
        seen |= nxt
        frontier = nxt
    return total if seen == full else None


@dataclass(frozen=True)
class OwnedNetwork:
    """A strategy profile: ``strategies[u]`` is the set of targets u buys."""

    n: int
    strategies: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise NetworkError("a network needs at least one agent")
        if len(self.strategies) != self.n:
            raise NetworkError("one strategy per agent required")
        for u, s in enumerate(self.strategies):
            for x in s:
                if not 0 <= x < self.n:
                    raise IndexOutOfRange(f"agent {u} buys unknown target {x}")
                if x == u:
                    raise SelfLoop(f"agent {u} buys an edge to itself")

    @cached_property
    def adj(self) -> tuple[int, ...]:
        adj = [0] * self.n
        for u, s in enumerate(self.strategies):
            for x in s:
                adj[u] |= 1 << x
                adj[x] |= 1 << u
        return tuple(adj)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Undirected edges ``(a, b)`` with ``a < b``, sorted."""
        return tuple(
            (a, b) for a in range(self.n) for b in bits(self.adj[a] >> (a + 1) << (a + 1))
        )

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def neighbors(self, u: int) -> list[int]:
        return list(bits(self.adj[u]))

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.adj[a] >> b & 1)

    def buys(self, u: int, x: int) -> bool:
        return x in self.strategies[u]

    def owners(self, a: int, b: int) -> tuple[int, ...]:
        return tuple(x for x, y in ((a, b), (b, a)) if y in self.strategies[x])

    def owner(self, a: int, b: int) -> int:
        """The buyer of edge ``(a, b)``; the smaller index if both buy it."""
        owners = self.owners(a, b)
        if not owners:
            raise NetworkError(f"({a}, {b}) is not an edge")
        return min(owners)

    @property
    def purchases(self) -> int:
        return sum(len(s) for s in self.strategies)

    @property
    def bought_edges(self) -> list[tuple[int, int]]:
        return [(u, x) for u, s in enumerate(self.strategies) for x in sorted(s)]

    @cached_property
    def is_connected(self) -> bool:
        seen = 1
        frontier = 1
        while frontier:
            nxt = 0
            for x in bits(frontier):
                nxt |= self.adj[x]
            frontier = nxt & ~seen
            seen |= frontier
        return seen == self.full_mask

    @property
    def is_tree(self) -> bool:
        return self.is_connected and len(self.edges) == self.n - 1

    def with_strategy(self, u: int, strategy: Iterable[int]) -> "OwnedNetwork":
        strategies = list(self.strategies)
        strategies[u] = frozenset(strategy)
        return OwnedNetwork(self.n, tuple(strategies))

    def relabel(self, perm: Sequence[int]) -> "OwnedNetwork":
        """Network in which old vertex ``v`` becomes ``perm[v]``."""
        strategies = [frozenset()] * self.n
        for u, s in enumerate(self.strategies):
            strategies[perm[u]] = frozenset(perm[x] for x in s)
        return OwnedNetwork(self.n, tuple(strategies))

    def __repr__(self) -> str:
        return f"OwnedNetwork(n={self.n}, bought={self.bought_edges})"


def build_network(n: int, bought_edges: Iterable[tuple[int, int]]) -> OwnedNetwork:
    if n < 1:
        raise NetworkError("a network needs at least one agent")
    strategies: list[set[int]] = [set() for _ in range(n)]
    for owner, target in bought_edges:
        if not (0 <= owner < n and 0 <= target < n):
            raise IndexOutOfRange(f"edge ({owner}, {target}) outside 0..{n - 1}")
        if owner == target:
            raise SelfLoop(f"agent {owner} cannot buy an edge to itself")
        strategies[owner].add(target)
    return OwnedNetwork(n, tuple(frozenset(s) for s in strategies))


def from_adjacency(n: int, edges: Iterable[tuple[int, int]]) -> OwnedNetwork:
    """Network where every edge ``(a, b)`` is bought by its first endpoint."""
    return build_network(n, edges)


class DistanceMatrix:
    """Symmetric table of hop distances; entries are ``int`` or ``INF``."""

    def __init__(self, rows: list[list]):
        self._rows = rows

    @property
    def n(self) -> int:
        return len(self._rows)

    def __getitem__(self, key):
        a, b = key
        return self._rows[a][b]

    def row(self, a: int) -> list:
        return list(self._rows[a])

    def rows(self) -> list[list]:
        return [list(r) for r in self._rows]

    def __eq__(self, other) -> bool:
        return isinstance(other, DistanceMatrix) and self._rows == other._rows

    def __repr__(self) -> str:
        return f"DistanceMatrix({self._rows!r})"


def all_pairs_distances(net: OwnedNetwork) -> DistanceMatrix:
    rows = []
    for s in range(net.n):
        rows.append([INF if d is None else d for d in bfs_distances(net.adj, s)])
    return DistanceMatrix(rows)


def distcost(net: OwnedNetwork, u: int):
    """Sum of distances from ``u`` to every vertex, or ``INF`` if disconnected."""
    if not net.is_connected:
        return INF
    return sum(bfs_distances(net.adj, u))


def sum_distance_to_set(net: OwnedNetwork, x: int, targets: Iterable[int]):
    dist = bfs_distances(net.adj, x)
    total = 0
    for t in targets:
        if dist[t] is None:
            return INF
        total += dist[t]
    return total


def shortest_path(adj: Sequence[int], src: int, dst: int, banned: Iterable[tuple[int, int]] = ()) -> list[int] | None:
    """A shortest ``src``-``dst`` path avoiding the ``banned`` undirected edges.

    Among shortest paths the one whose vertices, read back from ``dst``, always
    take the smallest-index predecessor is returned.
    """
    ban = {frozenset(e) for e in banned}
    n = len(adj)
    dist = [None] * n
    dist[src] = 0
    layer = [src]
    while layer and dist[dst] is None:
        nxt = []
        for x in layer:
            for y in bits(adj[x]):
                if dist[y] is None and frozenset((x, y)) not in ban:
                    dist[y] = dist[x] + 1
                    nxt.append(y)
        layer = sorted(nxt)
    if dist[dst] is None:
        return None
    path = [dst]
    while path[-1] != src:
        x = path[-1]
        path.append(min(
            y for y in bits(adj[x])
            if dist[y] is not None and dist[y] == dist[x] - 1 and frozenset((x, y)) not in ban
        ))
    path.reverse()
    return path


def path_uses_edge(path: Sequence[int], a: int, b: int) -> bool:
    return any({p, q} == {a, b} for p, q in zip(path, path[1:]))


@dataclass(frozen=True)
class BiconnectedComponent:
    vertices: frozenset[int]
    edges: frozenset[tuple[int, int]]

    def adjacency(self, n: int) -> list[int]:
        adj = [0] * n
        for a, b in self.edges:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        return adj

    def is_cycle(self) -> bool:
        return len(self.edges) == len(self.vertices)


def biconnected_components(net: OwnedNetwork) -> list[BiconnectedComponent]:
    """Blocks with at least three vertices, ordered by their smallest edge."""
    n = net.n
    adj = [list(bits(net.adj[v])) for v in range(n)]
    disc = [-1] * n
    low = [0] * n
    timer = 0
    blocks: list[BiconnectedComponent] = []
    edge_stack: list[tuple[int, int]] = []
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] == -1:
                    edge_stack.append((v, w))
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, v, iter(adj[w])))
                    advanced = True
                    break
                if w != parent and disc[w] < disc[v]:
                    edge_stack.append((v, w))
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if parent == -1:
                continue
            low[parent] = min(low[parent], low[v])
            if low[v] >= disc[parent]:
                block_edges = set()
                while True:
                    a, b = edge_stack.pop()
                    block_edges.add((min(a, b), max(a, b)))
                    if (a, b) == (parent, v):
                        break
                verts = frozenset(x for e in block_edges for x in e)
                if len(verts) >= 3:
                    blocks.append(BiconnectedComponent(verts, frozenset(block_edges)))
    blocks.sort(key=lambda b: min(b.edges))
    return blocks


def non_bridge_edges(net: OwnedNetwork) -> dict[tuple[int, int], int]:
    """Map every edge lying in a biconnected component to that component's index."""
    out = {}
    for i, block in enumerate(biconnected_components(net)):
        for e in block.edges:
            out[e] = i
    return out


@dataclass(frozen=True)
class CentroidReport:
    tree: str
    centroids: tuple[int, ...]
    subtree_sizes: dict[int, tuple[int, ...]]


def _require_tree(net: OwnedNetwork) -> None:
    if not net.is_tree:
        raise NotATree("network is not a tree")


def rooted_tree(net: OwnedNetwork, root: int) -> tuple[list[int], list[int]]:
    """Parent array (root maps to -1) and BFS order of a tree."""
    parent = [-1] * net.n
    order = [root]
    seen = 1 << root
    for v in order:
        for w in bits(net.adj[v] & ~seen):
            parent[w] = v
            seen |= 1 << w
            order.append(w)
    return parent, order


def subtree_sizes(net: OwnedNetwork, root: int) -> list[int]:
    parent, order = rooted_tree(net, root)
    size = [1] * net.n
    for v in reversed(order):
        if parent[v] >= 0:
            size[parent[v]] += size[v]
    return size


def centroids(net: OwnedNetwork, name: str = "") -> CentroidReport:
    _require_tree(net)
    n = net.n
    parent, _ = rooted_tree(net, 0)
    size = subtree_sizes(net, 0)
    found = []
    pieces = {}
    for v in range(n):
        parts = [size[w] for w in bits(net.adj[v]) if w != parent[v]]
        if parent[v] >= 0:
            parts.append(n - size[v])
        if all(2 * p <= n for p in parts):
            found.append(v)
            pieces[v] = tuple(sorted(parts, reverse=True))
    return CentroidReport(name or repr(net), tuple(found), pieces)
