"""Explicit deviations that witness the cycle-exclusion and tree bounds.

Each oracle takes a concrete network containing the structure a bound talks
about, builds one specific strategy change for one agent, evaluates it
exactly, and checks the inequality that change is supposed to satisfy.  The
checks are unconditional: they hold on every hypothesis-matching network,
stable or not, so a failure is a genuine counterexample to the bound.

Oracle ids: ``L1`` (triangle), ``L2`` (4-cycle), ``L4`` (swap towards a far
vertex), ``L5`` (strong critical pair) and ``T1`` (non-strong critical pair
with a short detour).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .game import Deviation, agent_cost, apply_deviation, format_alpha, parse_alpha
from .graph import OwnedNetwork, bfs_distances, shortest_path
from .structure import (
    closest_partition,
    critical_pair_witnesses,
    directed_orientation,
    is_critical_pair,
    is_strong,
    shortest_path_tree,
)

ORACLES = ("L1", "L2", "L4", "L5", "T1")


class HypothesisUnmet(ValueError):
    """The instance lacks the structure an oracle needs; ``step`` names the first missing piece."""

    def __init__(self, step: str, detail: str = ""):
        super().__init__(f"{step}: {detail}" if detail else step)
        self.step = step
        self.detail = detail


@dataclass(frozen=True)
class OracleOutcome:
    oracle: str
    alpha: Fraction
    deviations: tuple[Deviation, ...]
    gains: tuple[Fraction, ...]
    checks: dict
    info: dict = field(default_factory=dict)

    @property
    def bound_holds(self) -> bool:
        return all(self.checks.values())

    @property
    def improving(self) -> bool:
        return any(g > 0 for g in self.gains)

    def as_dict(self) -> dict:
        return {
            "oracle": self.oracle,
            "alpha": format_alpha(self.alpha),
            "deviations": [d.as_dict() for d in self.deviations],
            "gains": [format_alpha(g) if g >= 0 else "-" + format_alpha(-g) for g in self.gains],
            "checks": dict(self.checks),
            "bound_holds": self.bound_holds,
            "improving": self.improving,
            "info": self.info,
        }


def _dist(net: OwnedNetwork, x: int) -> int:
    d = agent_cost(net, 0, x).distance
    if not isinstance(d, int):
        raise HypothesisUnmet("connected", "the network is disconnected")
    return d


def _evaluate(net: OwnedNetwork, alpha: Fraction, dev: Deviation) -> tuple[int, int, Fraction]:
    """Distance before, distance after and total gain of one deviation."""
    after = apply_deviation(net, dev)
    before_cost = agent_cost(net, alpha, dev.agent)
    after_cost = agent_cost(after, alpha, dev.agent)
    if not isinstance(after_cost.distance, int):
        raise AssertionError(f"deviation {dev} disconnects the network")
    return before_cost.distance, after_cost.distance, before_cost.total - after_cost.total


def _require(cond: bool, step: str, detail: str = "") -> None:
    if not cond:
        raise HypothesisUnmet(step, detail)


def _sole_owner(net: OwnedNetwork, a: int, b: int) -> int:
    owners = net.owners(a, b)
    _require(len(owners) == 1, "single-owner", f"edge ({a}, {b}) has owners {owners}")
    return owners[0]


def find_triangle(net: OwnedNetwork) -> tuple[int, int, int] | None:
    for a, b in net.edges:
        common = net.adj[a] & net.adj[b] & ~((1 << (b + 1)) - 1)
        if common:
            return a, b, (common & -common).bit_length() - 1
    return None


def find_induced_square(net: OwnedNetwork) -> tuple[int, int, int, int] | None:
    """Smallest chordless 4-cycle ``(a, b, c, d)`` with ``a`` its least vertex."""
    n = net.n
    adj = net.adj
    for a in range(n):
        for c in range(a + 1, n):
            if adj[a] >> c & 1:
                continue
            common = [x for x in range(a + 1, n) if adj[a] >> x & 1 and adj[c] >> x & 1]
            for i, b in enumerate(common):
                for d in common[i + 1:]:
                    if not adj[b] >> d & 1:
                        return a, b, c, d
    return None


def triangle_oracle(net: OwnedNetwork, alpha, triangle=None) -> OracleOutcome:
    """The owner of the edge facing the largest closest-set drops it.

    Certifies that the distance increase is at most the size of the far
    endpoint's closest-set and at most ``(n - 1) / 2``.
    """
    alpha = parse_alpha(alpha)
    _require(net.is_connected, "connected")
    tri = triangle if triangle is not None else find_triangle(net)
    _require(tri is not None, "triangle", "no 3-cycle")
    _require(len(set(tri)) == 3 and all(net.has_edge(tri[i], tri[i - 1]) for i in range(3)), "triangle",
             f"{tri} is not a 3-cycle")
    part = closest_partition(net, tri)
    sizes = [len(s) for s in part.closest]
    top = sizes.index(max(sizes))
    a, b = tri[(top + 1) % 3], tri[(top + 2) % 3]
    buyer = net.owner(a, b)
    far = b if buyer == a else a
    far_size = sizes[tri.index(far)]
    dev = Deviation.to(net, buyer, net.strategies[buyer] - {far})
    before, after, gain = _evaluate(net, alpha, dev)
    inc = after - before
    n = net.n
    return OracleOutcome("L1", alpha, (dev,), (gain,), {
        "increase_within_far_set": inc <= far_size,
        "increase_within_half": 2 * inc <= n - 1,
        "gain_at_least_alpha_minus_threshold": gain >= alpha - Fraction(n - 1, 2),
    }, {"triangle": list(tri), "closest_sizes": sizes, "increase": inc})


def square_oracle(net: OwnedNetwork, alpha, square=None) -> OracleOutcome:
    """Swap-and-delete when one agent owns two edges of a chordless 4-cycle, else a single deletion."""
    alpha = parse_alpha(alpha)
    n = net.n
    _require(net.is_connected, "connected")
    sq = tuple(square) if square is not None else find_induced_square(net)
    _require(sq is not None, "square", "no chordless 4-cycle")
    _require(len(set(sq)) == 4 and all(net.has_edge(sq[i], sq[i - 1]) for i in range(4)), "square",
             f"{sq} is not a 4-cycle")
    _require(not net.has_edge(sq[0], sq[2]) and not net.has_edge(sq[1], sq[3]), "chordless")
    owners = [_sole_owner(net, sq[i], sq[(i + 1) % 4]) for i in range(4)]
    doubles = sorted(x for x in sq if owners.count(x) == 2)
    if doubles:
        i = sq.index(doubles[0])
        u = [sq[(i + k) % 4] for k in range(4)]
        part = closest_partition(net, u)
        v = [len(s) for s in part.closest]
        dev = Deviation.swap(net, u[0], u[1], u[2], delete=(u[3],))
        before, after, gain = _evaluate(net, alpha, dev)
        inc = after - before
        return OracleOutcome("L2", alpha, (dev,), (gain,), {
            "increase_within_n_minus_3": inc <= n - 3,
            "gain_at_least_alpha_minus_n_plus_3": gain >= alpha - (n - 3),
        }, {"case": "double-owner", "cycle": u, "closest_sizes": v, "increase": inc,
            "within_partition_estimate": inc <= v[1] + v[3] - v[2]})
    u = list(directed_orientation(net, sq))
    start = u.index(min(u))
    u = u[start:] + u[:start]
    part = closest_partition(net, u)
    v = [len(s) for s in part.closest]
    z = [len(s) for s in part.ties]
    i = min(range(4), key=lambda j: (v[j] + z[(j + 1) % 4], j))
    buyer, target = u[i - 1], u[i]
    dev = Deviation.to(net, buyer, net.strategies[buyer] - {target})
    before, after, gain = _evaluate(net, alpha, dev)
    inc = after - before
    return OracleOutcome("L2", alpha, (dev,), (gain,), {
        "increase_within_partition": inc <= 2 * v[i] + z[(i + 1) % 4],
        "increase_within_half": 2 * inc <= n,
        "gain_at_least_alpha_minus_half": gain >= alpha - Fraction(n, 2),
    }, {"case": "directed", "cycle": u, "closest_sizes": v, "tie_sizes": z, "increase": inc})


def _far_swap(net: OwnedNetwork, alpha: Fraction, a: int, a_prime: int, b: int, extra: int | None,
              dist_b: int):
    _require(a != b and a_prime != b, "distinct", "need a != b and a' != b")
    _require(net.buys(a, a_prime), "owns-edge", f"{a} does not buy ({a}, {a_prime})")
    d = bfs_distances(net.adj, b)
    _require(d[a] is not None and d[a] >= 2, "far", f"d({a}, {b}) < 2")
    avoid = {a_prime: {a}}
    if extra is not None:
        _require(net.buys(a, extra) and extra not in (a_prime, b), "second-edge")
        avoid.setdefault(extra, set()).add(a)
        avoid.setdefault(a, set()).add(extra)
    tree = shortest_path_tree(net, b, avoid=avoid)
    _require(tree is not None, "tree", f"no shortest-path tree from {b} meets the edge constraints")
    kept = tree.edges()
    drop = tuple(x for x in sorted(net.strategies[a]) if x != a_prime and frozenset((a, x)) not in kept)
    dev = Deviation.swap(net, a, a_prime, b, delete=drop)
    before, after, gain = _evaluate(net, alpha, dev)
    n = net.n
    lhs = gain - (before - dist_b - (n - 3))
    if extra is not None:
        lhs -= alpha
    checks = {
        "distance_within_far_plus_n_minus_3": after <= dist_b + n - 3,
        "gain_lower_bound": lhs >= 0,
    }
    return dev, gain, checks, {"tree": tree.as_dict(), "deleted": list(drop), "distance_after": after}


def far_swap_oracle(net: OwnedNetwork, alpha, a: int, a_prime: int, b: int, extra: int | None = None) -> OracleOutcome:
    """Agent ``a`` swaps ``(a, a')`` for ``(a, b)`` and drops owned edges off a BFS tree from ``b``.

    Certifies that the new distance cost of ``a`` is at most
    ``distcost(b) + n - 3``; with ``extra`` the second edge is guaranteed to
    be dropped, so the gain is at least ``alpha`` more.
    """
    alpha = parse_alpha(alpha)
    _require(net.is_connected, "connected")
    dev, gain, checks, info = _far_swap(net, alpha, a, a_prime, b, extra, _dist(net, b))
    return OracleOutcome("L4", alpha, (dev,), (gain,), checks, info)


def _pair_args(net: OwnedNetwork, pair):
    v, u, v1, v2, u_prime = pair
    _require(net.is_connected, "connected")
    dist = [bfs_distances(net.adj, s) for s in range(net.n)]
    _require(is_critical_pair(net, v, u, v1, v2, u_prime, dist), "critical-pair", f"{pair}")
    return v, u, v1, v2, u_prime, dist


def strong_pair_oracle(net: OwnedNetwork, alpha, pair) -> OracleOutcome:
    """Two far swaps on a strong critical pair ``(v, u, v1, v2, u')``.

    Certifies that the two agents' gains sum to at least ``alpha - (2n - 6)``.
    """
    alpha = parse_alpha(alpha)
    v, u, v1, v2, u_prime, dist = _pair_args(net, pair)
    _require(is_strong(net, v, u, v2, dist), "strong")
    dv, du = _dist(net, v), _dist(net, u)
    dev_u, gain_u, checks_u, info_u = _far_swap(net, alpha, u, u_prime, v, None, dv)
    dev_v, gain_v, checks_v, info_v = _far_swap(net, alpha, v, v1, u, v2, du)
    n = net.n
    checks = {f"u_{k}": ok for k, ok in checks_u.items()}
    checks.update({f"v_{k}": ok for k, ok in checks_v.items()})
    checks["summed_gain_at_least_alpha_minus_threshold"] = gain_u + gain_v >= alpha - (2 * n - 6)
    return OracleOutcome("L5", alpha, (dev_u, dev_v), (gain_u, gain_v), checks,
                         {"pair": list(pair), "u_side": info_u, "v_side": info_v})


def _t1_setup(net: OwnedNetwork, pair):
    v, u, v1, v2, u_prime, dist = _pair_args(net, pair)
    _require(not is_strong(net, v, u, v2, dist), "not-strong")
    duv = dist[u][v]
    path = shortest_path(net.adj, v, v2, banned=[(v, v1), (v, v2)])
    _require(path is not None and len(path) - 1 <= 2 * duv, "cool-path",
             f"no {v}-{v2} path of length <= {2 * duv} avoiding both edges")
    tree = shortest_path_tree(net, u, fixed={v: v1, v2: v})
    _require(tree is not None, "tree")
    x_set = tree.descendants(v2)
    n = net.n
    dcost = [_dist(net, s) for s in (u, v)]
    du, dv = dcost
    _require(du <= dv + n - 3, "distance-inequality-u", f"distcost({u}) > distcost({v}) + n - 3")
    d_v_x = sum(dist[v][x] for x in x_set)
    d_u_rest = sum(dist[u][x] for x in range(n) if x not in x_set)
    _require(dv <= d_v_x + n - len(x_set) + d_u_rest - 2, "swap-inequality-v",
             f"distcost({v}) exceeds its swap estimate")
    return v, u, v1, v2, dist, duv, path, tree, x_set


def tree_oracle(net: OwnedNetwork, alpha, pair) -> OracleOutcome:
    """``v`` swaps ``(v, v1)`` for ``(v, u)`` and drops ``(v, v2)`` on a non-strong critical pair.

    Preconditions, checked in order: the pair is critical and not strong, a
    ``v``-``v2`` path of length at most ``2 d(u, v)`` avoids both of ``v``'s
    pair edges, and the two distance inequalities that stability of ``u``
    and ``v`` would guarantee.  Certifies a distance increase of at most
    ``4n - 10 - 3|X|`` where ``X`` is the subtree below ``v2`` in the BFS tree
    from ``u``.
    """
    alpha = parse_alpha(alpha)
    v, u, v1, v2, dist, duv, path, tree, x_set = _t1_setup(net, pair)
    dev = Deviation.swap(net, v, v1, u, delete=(v2,))
    before, after, gain = _evaluate(net, alpha, dev)
    n, x = net.n, len(x_set)
    inc = after - before
    return OracleOutcome("T1", alpha, (dev,), (gain,), {
        "increase_within_subtree_bound": inc <= 4 * n - 10 - 3 * x,
        "increase_within_threshold": inc <= 4 * n - 13,
        "depth_times_subtree": duv * x <= 2 * n - 5 - x,
        "gain_at_least_alpha_minus_threshold": gain >= alpha - (4 * n - 13),
    }, {"pair": list(pair), "path": list(path), "tree": tree.as_dict(), "subtree": sorted(x_set),
        "increase": inc, "depth_times_subtree": duv * x, "depth_times_subtree_limit": 2 * n - 5 - x})


def proof_deviation_oracle(oracle: str, net: OwnedNetwork, alpha, **params) -> OracleOutcome:
    if oracle == "L1":
        return triangle_oracle(net, alpha, params.get("triangle"))
    if oracle == "L2":
        return square_oracle(net, alpha, params.get("square"))
    if oracle == "L4":
        return far_swap_oracle(net, alpha, params["a"], params["a_prime"], params["b"], params.get("extra"))
    if oracle == "L5":
        return strong_pair_oracle(net, alpha, params["pair"])
    if oracle == "T1":
        return tree_oracle(net, alpha, params["pair"])
    raise KeyError(f"unknown oracle {oracle!r}")


# --- seeded instance samplers -------------------------------------------------

def _owned(n: int, edges, rng: random.Random) -> OwnedNetwork:
    strategies = [set() for _ in range(n)]
    for a, b in edges:
        if rng.random() < 0.5:
            strategies[a].add(b)
        else:
            strategies[b].add(a)
    return OwnedNetwork(n, tuple(frozenset(s) for s in strategies))


def _grow(n: int, core: list[int], edges: set, rng: random.Random, extra: int, forbidden=()) -> set:
    """Attach the remaining vertices as random trees, then add ``extra`` random chords."""
    placed = list(core)
    rest = [x for x in range(n) if x not in core]
    rng.shuffle(rest)
    for x in rest:
        y = rng.choice(placed)
        edges.add((min(x, y), max(x, y)))
        placed.append(x)
    banned = {tuple(sorted(p)) for p in forbidden}
    for _ in range(extra):
        a, b = rng.sample(range(n), 2)
        e = (min(a, b), max(a, b))
        if e not in banned:
            edges.add(e)
    return edges


def random_network(rng: random.Random, n: int, extra: int) -> OwnedNetwork:
    """Random spanning tree plus up to ``extra`` random edges, each edge with one random owner."""
    start = rng.randrange(n)
    return _owned(n, _grow(n, [start], set(), rng, extra), rng)


def sample_triangle(rng: random.Random, n: int) -> tuple[OwnedNetwork, dict]:
    core = rng.sample(range(n), 3)
    edges = {tuple(sorted((core[i], core[i - 1]))) for i in range(3)}
    net = _owned(n, _grow(n, core, edges, rng, rng.randrange(n)), rng)
    return net, {"triangle": tuple(core)}


def sample_square(rng: random.Random, n: int) -> tuple[OwnedNetwork, dict]:
    """A chordless 4-cycle; half the time one agent owns two of its edges, otherwise it is directed."""
    core = rng.sample(range(n), 4)
    chords = [(core[0], core[2]), (core[1], core[3])]
    edges = _grow(n, core, set(), rng, rng.randrange(n), forbidden=chords)
    cyc = [(core[i], core[(i + 1) % 4]) for i in range(4)]
    for a, b in cyc:
        edges.discard((min(a, b), max(a, b)))
    net = _owned(n, edges, rng)
    strategies = [set(s) for s in net.strategies]
    if rng.random() < 0.5:
        for i, (a, b) in enumerate(cyc):
            if i in (0, 3):
                owner = core[0]
            else:
                owner = a if rng.random() < 0.5 else b
            strategies[owner].add(b if owner == a else a)
    else:
        for a, b in cyc:
            strategies[a].add(b)
    net = OwnedNetwork(n, tuple(frozenset(s) for s in strategies))
    return net, {"square": tuple(core)}


def sample_far_swap(rng: random.Random, n: int, tries: int = 1000) -> tuple[OwnedNetwork, dict]:
    for _ in range(tries):
        net = random_network(rng, n, rng.randrange(n))
        buyers = [x for x in range(n) if net.strategies[x]]
        a = rng.choice(buyers)
        a_prime = rng.choice(sorted(net.strategies[a]))
        d = bfs_distances(net.adj, a)
        far = [b for b in range(n) if d[b] >= 2 and b != a_prime]
        if not far:
            continue
        b = rng.choice(far)
        others = [x for x in sorted(net.strategies[a]) if x not in (a_prime, b)]
        extra = rng.choice(others) if others and rng.random() < 0.5 else None
        params = {"a": a, "a_prime": a_prime, "b": b, "extra": extra}
        try:
            far_swap_oracle(net, 0, **params)
        except HypothesisUnmet:
            continue
        return net, params
    raise RuntimeError("no instance found")


def _pair_candidates(net: OwnedNetwork, strong: bool):
    return sorted({w[:5] for w in critical_pair_witnesses(net) if w[5] == strong})


def sample_strong_pair(rng: random.Random, n: int, tries: int = 10000) -> tuple[OwnedNetwork, dict]:
    for _ in range(tries):
        net = random_network(rng, n, 1 + rng.randrange(n))
        cands = _pair_candidates(net, True)
        if cands:
            return net, {"pair": rng.choice(cands)}
    raise RuntimeError("no instance found")


def _stringy_edges(rng: random.Random, n: int, extra: int) -> set:
    """A spanning tree that mostly follows a random path, plus random chords; favours long cycles."""
    order = list(range(n))
    rng.shuffle(order)
    follow = rng.uniform(0.5, 1.0)
    edges = set()
    for i in range(1, n):
        y = order[i - 1] if rng.random() < follow else rng.choice(order[:i])
        edges.add((min(order[i], y), max(order[i], y)))
    for _ in range(extra):
        a, b = rng.sample(range(n), 2)
        edges.add((min(a, b), max(a, b)))
    return edges


def sample_tree_pair(rng: random.Random, n: int, tries: int = 100000) -> tuple[OwnedNetwork, dict]:
    """Pick the graph first, then a structural pair, then owners that make it a critical pair."""
    for _ in range(tries):
        edges = _stringy_edges(rng, n, rng.randrange(2, n // 2 + 2))
        both = OwnedNetwork(n, tuple(
            frozenset(b if a == x else a for a, b in edges if x in (a, b)) for x in range(n)))
        cands = sorted({w[:5] for w in critical_pair_witnesses(both) if not w[5]})
        rng.shuffle(cands)
        for v, u, v1, v2, u_prime in cands:
            forced = {(min(v, x), max(v, x)): v for x in (v1, v2)}
            forced[(min(u, u_prime), max(u, u_prime))] = u
            strategies = [set() for _ in range(n)]
            for a, b in sorted(edges):
                owner = forced.get((a, b), a if rng.random() < 0.5 else b)
                strategies[owner].add(b if owner == a else a)
            net = OwnedNetwork(n, tuple(frozenset(s) for s in strategies))
            pair = (v, u, v1, v2, u_prime)
            try:
                _t1_setup(net, pair)
            except HypothesisUnmet:
                continue
            return net, {"pair": pair}
    raise RuntimeError("no instance found")


SAMPLERS = {
    "L1": sample_triangle,
    "L2": sample_square,
    "L4": sample_far_swap,
    "L5": sample_strong_pair,
    "T1": sample_tree_pair,
}

THRESHOLDS = {
    "L1": lambda n: Fraction(n - 1, 2),
    "L2": lambda n: Fraction(n - 2),
    "L4": lambda n: Fraction(n - 3),
    "L5": lambda n: Fraction(2 * n - 6),
    "T1": lambda n: Fraction(4 * n - 13),
}


def sample_instance(oracle: str, rng: random.Random, n: int) -> tuple[OwnedNetwork, dict, Fraction]:
    """A hypothesis-matching network, its oracle parameters and a price just above the oracle's threshold."""
    net, params = SAMPLERS[oracle](rng, n)
    alpha = THRESHOLDS[oracle](n) + Fraction(rng.randrange(1, 9), 4)
    return net, params, alpha
