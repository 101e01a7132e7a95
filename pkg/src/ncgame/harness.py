"""Lemma predicates checked over every equilibrium of an enumeration.

A lemma entry carries a price threshold, a minimum size and a structural
predicate.  ``verify_lemma`` enumerates the stable profiles once for a whole
price grid, evaluates the predicate on each equilibrium and, where a
proof-deviation oracle matches, runs it too.  Reports are ``verified`` only
inside the lemma's hypothesis; outside it the predicate failures are listed
as observations.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .bounds import opt_social_cost, stable_tree_depth_diameter, subtree_size_lower_bound, tree_poa_bound
from .canon import canonical_profile
from .enumeration import DEDUPE_LIMIT, GRAPH, PROFILE, EnumerationSpec, scan_profiles
from .game import (
    DEFAULT_EXACT_CAP,
    EXACT,
    SINGLE_MOVE,
    best_response_dynamics,
    format_alpha,
    in_interval,
    parse_alpha,
    social_cost,
)
from .graph import INF, OwnedNetwork, biconnected_components, bfs_distances, centroids, rooted_tree
from .oracles import HypothesisUnmet, find_induced_square, find_triangle, proof_deviation_oracle, random_network
from .structure import (
    NotFound,
    cool_path_witness,
    critical_pair_witnesses,
    is_directed_cycle,
    is_min_cycle,
    simple_cycles,
)

VERIFIED = "verified"
VIOLATED = "violated"
OUTSIDE = "outside-hypothesis"


class UnknownLemma(KeyError):
    pass


# -- structural predicates: each returns a list of findings, empty when it holds

def _triangles(net: OwnedNetwork, alpha) -> list[dict]:
    tri = find_triangle(net)
    return [] if tri is None else [{"cycle": list(tri)}]


def _squares(net: OwnedNetwork, alpha) -> list[dict]:
    for cyc in simple_cycles(net, 4):
        if len(cyc) == 4:
            return [{"cycle": list(cyc)}]
    return []


def _directed_cycle_blocks(net: OwnedNetwork, alpha) -> list[dict]:
    out = []
    for block in biconnected_components(net):
        if block.is_cycle():
            cyc = _block_cycle(block)
            if is_directed_cycle(net, cyc):
                out.append({"block": cyc})
    return out


def _cycle_blocks(net: OwnedNetwork, alpha) -> list[dict]:
    return [{"block": _block_cycle(b)} for b in biconnected_components(net) if b.is_cycle()]


def _block_cycle(block) -> list[int]:
    adj: dict[int, list[int]] = {}
    for a, b in block.edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    start = min(adj)
    cyc = [start, min(adj[start])]
    while True:
        nxt = [x for x in adj[cyc[-1]] if x != cyc[-2]][0]
        if nxt == start:
            return cyc
        cyc.append(nxt)


def _strong_pairs(net: OwnedNetwork, alpha) -> list[dict]:
    for v, u, v1, v2, y, strong in critical_pair_witnesses(net):
        if strong:
            return [{"pair": [v, u, v1, v2, y]}]
    return []


def _bad_min_cycles(net: OwnedNetwork, alpha) -> list[dict]:
    if net.is_tree:
        return []
    dist = [bfs_distances(net.adj, s) for s in range(net.n)]
    out = []
    for cyc in simple_cycles(net):
        if is_min_cycle(net, cyc, dist) and (len(cyc) < 5 or not is_directed_cycle(net, cyc)):
            out.append({"cycle": list(cyc), "directed": is_directed_cycle(net, cyc)})
    return out


def _no_cool_path(net: OwnedNetwork, alpha) -> list[dict]:
    if net.is_tree:
        return []
    try:
        cool_path_witness(net)
    except NotFound as exc:
        return [{"step": exc.step, "detail": exc.detail}]
    return []


def _non_tree(net: OwnedNetwork, alpha) -> list[dict]:
    return [] if net.is_tree else [{"edges": [list(e) for e in net.edges]}]


def _centroid_orientation(net: OwnedNetwork, alpha) -> list[dict]:
    """Below every centroid root, edges are bought by the parent and each such child is a centroid of its subtree."""
    if not net.is_tree:
        return []
    out = []
    for c in centroids(net).centroids:
        parent, order = rooted_tree(net, c)
        depth = [0] * net.n
        for x in order[1:]:
            depth[x] = depth[parent[x]] + 1
        for buyer in range(net.n):
            for target in net.strategies[buyer]:
                if c in (buyer, target):
                    continue
                if depth[buyer] >= depth[target]:
                    out.append({"centroid": c, "edge": [buyer, target], "problem": "child buys towards the root"})
                elif not _is_subtree_centroid(parent, order, target):
                    out.append({"centroid": c, "edge": [buyer, target], "problem": "child is not a centroid of its subtree"})
    return out


def _subtree_members(parent, order, top) -> list[int]:
    inside = {top}
    for x in order:
        if x != top and parent[x] in inside:
            inside.add(x)
    return sorted(inside)


def _is_subtree_centroid(parent, order, top) -> bool:
    members = set(_subtree_members(parent, order, top))
    size = len(members)
    sizes = {x: 1 for x in members}
    for x in reversed(order):
        if x in members and x != top:
            sizes[parent[x]] += sizes[x]
    biggest = max((sizes[x] for x in members if x != top and parent[x] == top), default=0)
    return 2 * biggest <= size


def _root_paths(parent, order, root) -> list[list[int]]:
    kids = {x: [] for x in order}
    for x in order[1:]:
        kids[parent[x]].append(x)
    return [_path_up(parent, x, root) for x in order if not kids[x] and x != root]


def _path_up(parent, x, root) -> list[int]:
    path = [x]
    while path[-1] != root:
        path.append(parent[path[-1]])
    return path[::-1]


def _closest_counts(net: OwnedNetwork, anchors: list[int], dist) -> list[int]:
    counts = [0] * len(anchors)
    for x in range(net.n):
        ds = [dist[a][x] for a in anchors]
        best = min(ds)
        if ds.count(best) == 1:
            counts[ds.index(best)] += 1
    return counts


def _partial_sums(net: OwnedNetwork, alpha) -> list[dict]:
    """Closest-set partial sums along every downward path from a centroid child to a leaf.

    Checked for every starting vertex strictly below the centroid, which
    covers both natural indexings of the path.
    """
    if not net.is_tree:
        return []
    n = net.n
    dist = [bfs_distances(net.adj, s) for s in range(n)]
    out = []
    for c in centroids(net).centroids:
        parent, order = rooted_tree(net, c)
        for path in _root_paths(parent, order, c):
            for s in range(1, len(path)):
                anchors = path[s:]
                total = 0
                for i, cnt in enumerate(_closest_counts(net, anchors, dist), start=1):
                    total += cnt
                    if total < subtree_size_lower_bound(n, i):
                        out.append({"centroid": c, "path": anchors, "index": i, "partial_sum": total})
                        break
    return out


def tree_shape(net: OwnedNetwork) -> dict:
    """Centroid depth and diameter of a tree."""
    best_depth = None
    for c in centroids(net).centroids:
        d = bfs_distances(net.adj, c)
        best_depth = max(d) if best_depth is None else min(best_depth, max(d))
    diam = max(max(bfs_distances(net.adj, s)) for s in range(net.n))
    return {"depth": best_depth, "diameter": diam}


def _poa(net: OwnedNetwork, alpha) -> list[dict]:
    """Price-of-anarchy ratio and shape bounds of a stable tree."""
    n = net.n
    if not net.is_tree or alpha < 2 or n < 3:
        return []
    out = []
    ratio = social_cost(net, alpha) / opt_social_cost(n, alpha)
    bound = tree_poa_bound(n, alpha)
    if not ratio <= bound <= 4:
        out.append({"ratio": format_alpha(ratio), "bound": format_alpha(bound)})
    depth_bound, diam_bound = stable_tree_depth_diameter(n, alpha)
    for c in centroids(net).centroids:
        depth = max(bfs_distances(net.adj, c))
        if depth > depth_bound:
            out.append({"centroid": c, "depth": depth, "bound": format_alpha(depth_bound)})
    shape = tree_shape(net)
    if shape["diameter"] > diam_bound:
        out.append({"diameter": shape["diameter"], "bound": format_alpha(diam_bound)})
    return out


@dataclass(frozen=True)
class Lemma:
    id: str
    statement: str
    threshold: Callable[[int], Fraction] | None
    strict: bool
    min_n: int
    predicate: Callable
    oracle: str | None = None
    trees_only: bool = False

    def threshold_value(self, n: int):
        return None if self.threshold is None else self.threshold(n)

    def in_hypothesis(self, n: int, alpha: Fraction) -> bool:
        if n < self.min_n:
            return False
        t = self.threshold_value(n)
        if t is None:
            return alpha > 0
        return alpha > t if self.strict else alpha >= t


LEMMAS: dict[str, Lemma] = {lm.id: lm for lm in (
    Lemma("L1", "no 3-cycle", lambda n: Fraction(n - 1, 2), True, 3, _triangles, "L1"),
    Lemma("L2", "no 4-cycle", lambda n: Fraction(n - 2), True, 4, _squares, "L2"),
    Lemma("L3", "no biconnected component is a directed cycle", lambda n: Fraction(n - 2), True, 6,
          _directed_cycle_blocks),
    Lemma("L5", "no strong critical pair", lambda n: Fraction(2 * n - 6), True, 3, _strong_pairs, "L5"),
    Lemma("L7", "every min cycle is directed with length at least 5", lambda n: Fraction(2 * n - 6), True, 4,
          _bad_min_cycles),
    Lemma("C1", "no biconnected component is a cycle", lambda n: Fraction(2 * n - 6), True, 6, _cycle_blocks),
    Lemma("L8", "a non-tree equilibrium has a critical pair with a short detour", lambda n: Fraction(2 * n - 6),
          True, 6, _no_cool_path),
    Lemma("T1", "every equilibrium is a tree", lambda n: Fraction(4 * n - 13), True, 4, _non_tree, "T1"),
    Lemma("L9", "centroid-rooted stable trees are bought downwards by centroid-of-subtree children", None, True,
          2, _centroid_orientation, trees_only=True),
    Lemma("L10", "closest-set partial sums along centroid paths reach n(1 - 2^-i)", None, True, 2,
          _partial_sums, trees_only=True),
    Lemma("T2", "stable-tree PoA, depth and diameter bounds", lambda n: Fraction(2), False, 3, _poa,
          trees_only=True),
)}


@dataclass
class LemmaReport:
    lemma: str
    n: int
    alpha: Fraction
    mode: str
    route: str
    status: str
    instances: int
    equilibria: int
    violations: list = field(default_factory=list)
    observations: list = field(default_factory=list)
    oracle_outcomes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "n": self.n,
            "alpha": format_alpha(self.alpha),
            "mode": self.mode,
            "route": self.route,
            "status": self.status,
            "instances": self.instances,
            "equilibria": self.equilibria,
            "violations": self.violations,
            "observations": self.observations,
            "oracle_outcomes": self.oracle_outcomes,
        }


def _oracle_params(oracle: str, net: OwnedNetwork, finding: dict) -> list[dict]:
    if oracle == "L1":
        return [{"triangle": tuple(finding["cycle"])}]
    if oracle == "L2":
        sq = find_induced_square(net)
        return [] if sq is None else [{"square": sq}]
    if oracle == "L5":
        return [{"pair": tuple(finding["pair"])}]
    if oracle == "T1":
        pairs = sorted({w[:5] for w in critical_pair_witnesses(net) if not w[5]})
        return [{"pair": p} for p in pairs]
    return []


def _run_oracles(lemma: Lemma, net: OwnedNetwork, alpha: Fraction, findings: list[dict]) -> list[dict]:
    if lemma.oracle is None or not findings:
        return []
    out = []
    for params in _oracle_params(lemma.oracle, net, findings[0]):
        try:
            res = proof_deviation_oracle(lemma.oracle, net, alpha, **params)
        except HypothesisUnmet as exc:
            if lemma.oracle != "T1":
                out.append({"bought": [list(e) for e in net.bought_edges], "hypothesis_unmet": exc.step})
            continue
        entry = {"bought": [list(e) for e in net.bought_edges], **res.as_dict()}
        out.append(entry)
    return out


def _default_route(n: int, mode: str) -> str:
    return PROFILE if n <= 4 and mode == EXACT else GRAPH


def verify_lemma(lemma_id: str, n: int, alphas, mode: str = EXACT, route: str | None = None,
                 dedupe: bool | None = None, workers: int = 1, cap: int = DEFAULT_EXACT_CAP) -> list[LemmaReport]:
    """One report per price in ``alphas`` for the lemma's predicate over all equilibria on ``n`` agents."""
    lemma = LEMMAS.get(lemma_id)
    if lemma is None:
        raise UnknownLemma(f"unknown lemma {lemma_id!r}; known: {', '.join(LEMMAS)}")
    alphas = sorted({parse_alpha(a) for a in alphas})
    if not alphas:
        return []
    route = route or _default_route(n, mode)
    if dedupe is None:
        dedupe = n <= DEDUPE_LIMIT and route == GRAPH
    spec = EnumerationSpec(n, tuple(alphas), mode, route, dedupe=dedupe, trees_only=lemma.trees_only, cap=cap)
    found, examined = scan_profiles(spec, workers)
    reports = []
    for alpha in alphas:
        eqs = [net for net, iv in found if in_interval(alpha, iv)]
        inside = lemma.in_hypothesis(n, alpha)
        violations, observations, outcomes = [], [], []
        for net in eqs:
            findings = lemma.predicate(net, alpha)
            if findings:
                record = {"n": n, "bought": [list(e) for e in net.bought_edges], "findings": findings,
                          "certificate": {"verdict": "stable", "mode": mode}}
                (violations if inside else observations).append(record)
            outcomes.extend(_run_oracles(lemma, net, alpha, findings))
        status = VIOLATED if violations else (VERIFIED if inside else OUTSIDE)
        reports.append(LemmaReport(lemma.id, n, alpha, mode, route, status, examined, len(eqs),
                                   violations, observations, outcomes))
    return reports


@dataclass
class SearchResult:
    n: int
    alpha: Fraction
    seed: int
    budget: int
    mode: str
    candidates: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": format_alpha(self.alpha),
            "seed": self.seed,
            "budget": self.budget,
            "mode": self.mode,
            "candidates": [
                {"bought": [list(e) for e in net.bought_edges], "trial": trial,
                 "social_cost": "inf" if c is INF else format_alpha(c)}
                for net, trial, c in self.candidates
            ],
        }


def counterexample_search(n: int, alpha, budget: int, mode: str = SINGLE_MOVE, seed: int = 0,
                          max_rounds: int = 50) -> SearchResult:
    """Random profiles pushed to stability by best-response dynamics; non-tree survivors are returned.

    Survivors are only candidates for the given mode.  Distinct survivors up
    to isomorphism are kept (by bought-edge list beyond the relabelling limit),
    in order of discovery.
    """
    alpha = parse_alpha(alpha)
    if budget < 0:
        raise ValueError("budget must be non-negative")
    rng = random.Random(seed)
    result = SearchResult(n, alpha, seed, budget, mode)
    seen = set()
    for trial in range(budget):
        start = random_network(rng, n, rng.randrange(n + 1))
        traj = best_response_dynamics(start, alpha, "seeded-random", max_rounds, rng.getrandbits(64), mode)
        net = traj.final
        if not traj.converged or net.is_tree or not net.is_connected:
            continue
        key = canonical_profile(net) if n <= DEDUPE_LIMIT else tuple(net.bought_edges)
        if key in seen:
            continue
        seen.add(key)
        result.candidates.append((net, trial, social_cost(net, alpha)))
    return result
