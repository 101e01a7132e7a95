"""Brute-force canonical labelling for small graphs and profiles.

Vertices are first split into classes by colour refinement; the canonical
code is the smallest adjacency code over every relabelling that keeps the
classes in order.  Exhaustive within classes, so only meant for n <= 8.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import permutations, product
from typing import Sequence

from .graph import OwnedNetwork, bits


def _refine(out_masks: Sequence[int], in_masks: Sequence[int]) -> list[int]:
    n = len(out_masks)
    sig = [(m.bit_count(), i.bit_count()) for m, i in zip(out_masks, in_masks)]
    ranks = {s: r for r, s in enumerate(sorted(set(sig)))}
    color = [ranks[s] for s in sig]
    while True:
        sig = [
            (color[v], tuple(sorted(color[x] for x in bits(out_masks[v]))),
             tuple(sorted(color[x] for x in bits(in_masks[v]))))
            for v in range(n)
        ]
        ranks = {s: r for r, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if len(ranks) == len(set(color)):
            return new
        color = new


def _cells(color: list[int]) -> list[list[int]]:
    cells: dict[int, list[int]] = {}
    for v, c in enumerate(color):
        cells.setdefault(c, []).append(v)
    return [cells[c] for c in sorted(cells)]


def _code(out_masks: Sequence[int], order: Sequence[int]) -> int:
    n = len(order)
    pos = [0] * n
    for i, v in enumerate(order):
        pos[v] = i
    code = 0
    for i, v in enumerate(order):
        row = 0
        for x in bits(out_masks[v]):
            row |= 1 << pos[x]
        code |= row << (i * n)
    return code


def _orders(cells: list[list[int]]):
    for parts in product(*(permutations(c) for c in cells)):
        yield [v for part in parts for v in part]


def canonical_code(out_masks: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Smallest code and the vertex order achieving it.

    ``out_masks[v]`` is the bitmask of vertices ``v`` points at; for an
    undirected graph pass the adjacency masks.
    """
    n = len(out_masks)
    in_masks = [0] * n
    for v, m in enumerate(out_masks):
        for x in bits(m):
            in_masks[x] |= 1 << v
    cells = _cells(_refine(out_masks, in_masks))
    best = None
    best_order = None
    for order in _orders(cells):
        c = _code(out_masks, order)
        if best is None or c < best:
            best, best_order = c, order
    return best, tuple(best_order)


def profile_masks(net: OwnedNetwork) -> list[int]:
    out = []
    for s in net.strategies:
        m = 0
        for x in s:
            m |= 1 << x
        out.append(m)
    return out


def canonical_profile(net: OwnedNetwork) -> tuple[int, int]:
    """Isomorphism-invariant key of an ownership-labelled network."""
    return net.n, canonical_code(profile_masks(net))[0]


def canonical_relabel(net: OwnedNetwork) -> OwnedNetwork:
    _, order = canonical_code(profile_masks(net))
    perm = [0] * net.n
    for i, v in enumerate(order):
        perm[v] = i
    return net.relabel(perm)


def automorphisms(adj: Sequence[int]) -> list[tuple[int, ...]]:
    """Every permutation ``p`` (old -> new) with ``p(G) == G``."""
    n = len(adj)
    cells = _cells(_refine(adj, adj))
    out = []
    for parts in product(*(permutations(c) for c in cells)):
        p = [0] * n
        for cell, image in zip(cells, parts):
            for a, b in zip(cell, image):
                p[a] = b
        if all(_image(adj[v], p) == adj[p[v]] for v in range(n)):
            out.append(tuple(p))
    return out


def _image(mask: int, p: Sequence[int]) -> int:
    m = 0
    for x in bits(mask):
        m |= 1 << p[x]
    return m


def _from_code(n: int, code: int) -> tuple[int, ...]:
    full = (1 << n) - 1
    return tuple((code >> (i * n)) & full for i in range(n))


@lru_cache(maxsize=None)
def connected_graphs(n: int) -> tuple[tuple[int, ...], ...]:
    """Connected graphs on ``n`` vertices up to isomorphism, as adjacency masks.

    Built by adding one vertex to every smaller connected graph; every
    connected graph has a vertex whose removal keeps it connected.
    """
    if n < 1:
        return ()
    if n == 1:
        return ((0,),)
    found = {}
    for g in connected_graphs(n - 1):
        for s in range(1, 1 << (n - 1)):
            adj = list(g) + [s]
            for x in bits(s):
                adj[x] |= 1 << (n - 1)
            code, _ = canonical_code(adj)
            found.setdefault(code, None)
    return tuple(_from_code(n, c) for c in sorted(found))


@lru_cache(maxsize=None)
def trees(n: int) -> tuple[tuple[int, ...], ...]:
    """Unlabelled trees on ``n`` vertices, as adjacency masks."""
    if n < 1:
        return ()
    if n == 1:
        return ((0,),)
    found = {}
    for t in trees(n - 1):
        for v in range(n - 1):
            adj = list(t) + [1 << v]
            adj[v] |= 1 << (n - 1)
            found.setdefault(canonical_code(adj)[0], None)
    return tuple(_from_code(n, c) for c in sorted(found))


def edge_list(adj: Sequence[int]) -> list[tuple[int, int]]:
    return [(a, b) for a in range(len(adj)) for b in bits(adj[a]) if a < b]


def orientation_classes(adj: Sequence[int]):
    """One orientation per class under the graph's automorphisms.

    Yields ``(mask, orbit_size)``; bit ``i`` of ``mask`` set means the larger
    endpoint of edge ``i`` (in :func:`edge_list` order) buys it.
    """
    edges = edge_list(adj)
    index = {e: i for i, e in enumerate(edges)}
    m = len(edges)
    maps = []
    for p in automorphisms(adj):
        table = []
        for a, b in edges:
            pa, pb = p[a], p[b]
            j = index[(min(pa, pb), max(pa, pb))]
            table.append((1 << j, pa > pb))
        maps.append(table)
    seen = bytearray(1 << m)
    for mask in range(1 << m):
        if seen[mask]:
            continue
        orbit = set()
        for table in maps:
            img = 0
            for i, (bit, flip) in enumerate(table):
                if (mask >> i & 1) ^ flip:
                    img |= bit
            orbit.add(img)
        for img in orbit:
            seen[img] = 1
        yield mask, len(orbit)


def oriented_network(adj: Sequence[int], mask: int) -> OwnedNetwork:
    n = len(adj)
    strategies = [set() for _ in range(n)]
    for i, (a, b) in enumerate(edge_list(adj)):
        if mask >> i & 1:
            strategies[b].add(a)
        else:
            strategies[a].add(b)
    return OwnedNetwork(n, tuple(frozenset(s) for s in strategies))
