"""Exhaustive generation of strategy profiles and equilibrium filtering.

Two routes through profile space:

* ``profile``: every agent independently ranges over all subsets of the
  other agents, ``(2**(n-1))**n`` profiles including disconnected and
  doubly-bought ones;
* ``graph``: every connected graph with every single-owner orientation.
  With ``dedupe`` the graphs are taken up to isomorphism and orientations up
  to the graph's automorphisms, one representative per class.

Work is split into chunks (a fixed first-agent strategy, or one underlying
graph) so results can be merged in a canonical order whatever the worker
count.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

from .canon import canonical_profile, connected_graphs, edge_list, orientation_classes, oriented_network, trees
from .game import (
    DEFAULT_EXACT_CAP,
    EXACT,
    CapExceeded,
    EquilibriumCertificate,
    format_alpha,
    in_interval,
    parse_alpha,
    social_cost,
    stability_interval,
)
from .graph import INF, OwnedNetwork, bits

PROFILE = "profile"
GRAPH = "graph"
DEDUPE_LIMIT = 8
WORKERS_ENV = "NCGAME_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class EnumerationSpec:
    n: int
    alphas: tuple[Fraction, ...] = ()
    mode: str = EXACT
    route: str = GRAPH
    connected_only: bool = False
    dedupe: bool = False
    trees_only: bool = False
    cap: int = DEFAULT_EXACT_CAP

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(sorted({parse_alpha(a) for a in self.alphas})))
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.route not in (PROFILE, GRAPH):
            raise ValueError(f"unknown route {self.route!r}")
        if self.mode == EXACT and self.n > self.cap:
            raise CapExceeded(f"exact equilibria need n <= {self.cap}")
        if self.dedupe and self.n > DEDUPE_LIMIT:
            raise CapExceeded(f"brute-force relabelling is limited to n <= {DEDUPE_LIMIT}")


def profile_count(n: int) -> int:
    return (2 ** (n - 1)) ** n


def _subsets_of_others(n: int, u: int) -> list[frozenset[int]]:
    others = [x for x in range(n) if x != u]
    out = [frozenset()]
    for x in others:
        out += [s | {x} for s in out]
    return out


def _labelled_graphs(n: int, trees_only: bool) -> Iterator[tuple[int, ...]]:
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    for m in range(1 << len(pairs)):
        if trees_only and m.bit_count() != n - 1:
            continue
        adj = [0] * n
        for i, (a, b) in enumerate(pairs):
            if m >> i & 1:
                adj[a] |= 1 << b
                adj[b] |= 1 << a
        if _connected(adj):
            yield tuple(adj)


def _connected(adj: Sequence[int]) -> bool:
    seen = frontier = 1
    while frontier:
        nxt = 0
        for x in bits(frontier):
            nxt |= adj[x]
        frontier = nxt & ~seen
        seen |= frontier
    return seen == (1 << len(adj)) - 1


def _chunks(spec: EnumerationSpec) -> list:
    if spec.route == PROFILE:
        return list(range(2 ** (spec.n - 1)))
    if spec.dedupe:
        graphs = trees(spec.n) if spec.trees_only else connected_graphs(spec.n)
    else:
        graphs = tuple(_labelled_graphs(spec.n, spec.trees_only))
    return list(graphs)


def _chunk_profiles(spec: EnumerationSpec, chunk) -> Iterator[OwnedNetwork]:
    n = spec.n
    if spec.route == PROFILE:
        choices = [_subsets_of_others(n, u) for u in range(n)]
        first = choices[0][chunk]
        for rest in product(*choices[1:]):
            net = OwnedNetwork(n, (first,) + rest)
            if spec.connected_only and not net.is_connected:
                continue
            if spec.trees_only and not net.is_tree:
                continue
            yield net
        return
    adj = chunk
    if spec.dedupe:
        for mask, _ in orientation_classes(adj):
            yield oriented_network(adj, mask)
    else:
        for mask in range(1 << len(edge_list(adj))):
            yield oriented_network(adj, mask)


def enumerate_profiles(spec: EnumerationSpec) -> Iterator[OwnedNetwork]:
    """Stream every profile described by ``spec``.

    In the profile route ``dedupe`` keeps the first profile of each
    isomorphism class; the graph route dedupes structurally.
    """
    seen = set()
    for chunk in _chunks(spec):
        for net in _chunk_profiles(spec, chunk):
            if spec.dedupe and spec.route == PROFILE:
                key = canonical_profile(net)
                if key in seen:
                    continue
                seen.add(key)
            yield net


@dataclass
class EquilibriumRecord:
    network: OwnedNetwork
    certificate: EquilibriumCertificate
    social_cost: object
    is_tree: bool
    interval: tuple | None = None

    def sort_key(self):
        return tuple(self.network.bought_edges)

    def as_dict(self) -> dict:
        lo, hi = self.interval if self.interval else (None, None)
        return {
            "n": self.network.n,
            "bought": [list(e) for e in self.network.bought_edges],
            "social_cost": "inf" if self.social_cost is INF else format_alpha(self.social_cost),
            "tree": self.is_tree,
            "stable_for": None if self.interval is None else [format_alpha(lo), "inf" if hi is INF else format_alpha(hi)],
        }


def _scan_chunk(args) -> tuple[list[tuple[OwnedNetwork, tuple]], int]:
    spec, chunk = args
    lo = spec.alphas[0] if spec.alphas else 0
    hi = spec.alphas[-1] if spec.alphas else INF
    out = []
    seen = 0
    for net in _chunk_profiles(spec, chunk):
        seen += 1
        iv = stability_interval(net, spec.mode, spec.cap, within=(lo, hi))
        if iv is not None:
            out.append((net, iv))
    return out, seen


def scan_profiles(spec: EnumerationSpec, workers: int = 1) -> tuple[list[tuple[OwnedNetwork, tuple]], int]:
    """Stable profiles with their price range, plus the number of profiles examined.

    A profile is kept if it is stable somewhere in
    ``[min(alphas), max(alphas)]``.  Results are sorted by the bought-edge
    list.  With ``dedupe`` in the profile route the first member (in that
    order) of every isomorphism class is kept.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    chunks = _chunks(spec)
    tasks = [(spec, c) for c in chunks]
    if workers == 1:
        parts = [_scan_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_scan_chunk, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    examined = sum(count for _, count in parts)
    found = [item for part, _ in parts for item in part]
    found.sort(key=lambda item: item[0].bought_edges)
    if spec.dedupe and spec.route == PROFILE:
        seen = set()
        kept = []
        for net, iv in found:
            key = canonical_profile(net)
            if key not in seen:
                seen.add(key)
                kept.append((net, iv))
        found = kept
    return found, examined


def stable_profiles(spec: EnumerationSpec, workers: int = 1) -> list[tuple[OwnedNetwork, tuple]]:
    return scan_profiles(spec, workers)[0]


def find_equilibria_multi(spec: EnumerationSpec, workers: int = 1) -> dict[Fraction, list[EquilibriumRecord]]:
    out = {a: [] for a in spec.alphas}
    for net, iv in stable_profiles(spec, workers):
        # the scan clips intervals to the requested prices; report the full range
        iv = stability_interval(net, spec.mode, spec.cap)
        for a in spec.alphas:
            if in_interval(a, iv):
                out[a].append(EquilibriumRecord(
                    net, EquilibriumCertificate("stable", spec.mode), social_cost(net, a), net.is_tree, iv,
                ))
    return out


def find_equilibria(n: int, alpha, mode: str = EXACT, route: str | None = None, dedupe: bool = False,
                    workers: int = 1, trees_only: bool = False, cap: int = DEFAULT_EXACT_CAP) -> list[EquilibriumRecord]:
    """All stable profiles at one edge price.

    The default route is the full profile space up to ``n = 4`` and
    connected single-owner orientations beyond; both contain every
    equilibrium for a positive price.
    """
    alpha = parse_alpha(alpha)
    if route is None:
        route = PROFILE if n <= 4 else GRAPH
    spec = EnumerationSpec(n, (alpha,), mode, route, dedupe=dedupe, trees_only=trees_only, cap=cap)
    return find_equilibria_multi(spec, workers)[alpha]
