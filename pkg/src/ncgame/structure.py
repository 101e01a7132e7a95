"""Cycle and critical-pair structure of ownership-labelled networks."""
from __future__ import annotations

from dataclasses import dataclass

from .graph import (
    BiconnectedComponent,
    NetworkError,
    OwnedNetwork,
    bfs_distances,
    biconnected_components,
    bits,
    shortest_path,
)


class DuplicateAnchor(NetworkError):
    pass


class NotACycle(NetworkError):
    pass


class NoCycle(NetworkError):
    pass


class EdgeNotIncident(NetworkError):
    pass


class NotFound(Exception):
    """The cool-path construction stopped; ``step`` names where."""

    def __init__(self, step: str, detail: str = "", attempts: list | None = None):
        super().__init__(f"{step}: {detail}" if detail else step)
        self.step = step
        self.detail = detail
        self.attempts = attempts or []


def _distances(net: OwnedNetwork) -> list[list[int | None]]:
    return [bfs_distances(net.adj, s) for s in range(net.n)]


@dataclass(frozen=True)
class PartitionSets:
    anchors: tuple[int, ...]
    closest: tuple[frozenset[int], ...]
    ties: tuple[frozenset[int], ...] | None = None

    def unassigned(self, n: int) -> frozenset[int]:
        used = set().union(*self.closest, *(self.ties or ()))
        return frozenset(range(n)) - used


def closest_partition(net: OwnedNetwork, anchors) -> PartitionSets:
    """Vertices strictly closest to each anchor.

    With exactly four anchors (read as a 4-cycle ``u0 u1 u2 u3``) the tie sets
    are also returned: ``ties[i]`` holds vertices equidistant from ``u_i`` and
    ``u_{i-1}`` and strictly closer to both than to the other two anchors.
    """
    anchors = tuple(anchors)
    if len(set(anchors)) != len(anchors):
        raise DuplicateAnchor(f"anchors repeat: {anchors}")
    if not net.is_connected:
        raise NetworkError("closest_partition needs a connected network")
    dist = [bfs_distances(net.adj, a) for a in anchors]
    k = len(anchors)
    closest = []
    for i in range(k):
        closest.append(frozenset(
            x for x in range(net.n) if all(dist[i][x] < dist[j][x] for j in range(k) if j != i)
        ))
    ties = None
    if k == 4:
        ties = []
        for i in range(4):
            p = (i - 1) % 4
            ties.append(frozenset(
                x for x in range(net.n)
                if dist[i][x] == dist[p][x] and all(dist[i][x] < dist[j][x] for j in range(4) if j not in (i, p))
            ))
        ties = tuple(ties)
    return PartitionSets(anchors, tuple(closest), ties)


def _check_cycle(net: OwnedNetwork, cycle) -> tuple[int, ...]:
    cycle = tuple(cycle)
    k = len(cycle)
    if k < 3 or len(set(cycle)) != k:
        raise NotACycle(f"{cycle} is not a simple cycle")
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        if not (0 <= a < net.n and 0 <= b < net.n) or not net.has_edge(a, b):
            raise NotACycle(f"{cycle}: ({a}, {b}) is not an edge")
    return cycle


def is_min_cycle(net: OwnedNetwork, cycle, dist=None) -> bool:
    cycle = _check_cycle(net, cycle)
    k = len(cycle)
    for i in range(k):
        row = dist[cycle[i]] if dist is not None else bfs_distances(net.adj, cycle[i])
        for j in range(i + 1, k):
            if row[cycle[j]] != min(j - i, k - j + i):
                return False
    return True


def directed_orientation(net: OwnedNetwork, cycle) -> tuple[int, ...] | None:
    """The cycle listed so that each vertex is the sole buyer of its successor edge."""
    cycle = _check_cycle(net, cycle)
    for order in (cycle, cycle[::-1]):
        if all(net.owners(a, b) == (a,) for a, b in zip(order, order[1:] + order[:1])):
            return order
    return None


def is_directed_cycle(net: OwnedNetwork, cycle) -> bool:
    return directed_orientation(net, cycle) is not None


@dataclass(frozen=True)
class MinCycleRecord:
    vertices: tuple[int, ...]
    owners: tuple[tuple[int, ...], ...]
    is_min: bool
    is_directed: bool

    @property
    def length(self) -> int:
        return len(self.vertices)

    def edges(self) -> list[tuple[int, int]]:
        vs = self.vertices
        return [(a, b) for a, b in zip(vs, vs[1:] + vs[:1])]

    def contains_edge(self, a: int, b: int) -> bool:
        return any({a, b} == {x, y} for x, y in self.edges())

    def as_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "owners": [list(o) for o in self.owners],
            "length": self.length,
            "is_min": self.is_min,
            "is_directed": self.is_directed,
        }


def cycle_record(net: OwnedNetwork, cycle, dist=None) -> MinCycleRecord:
    cycle = _check_cycle(net, cycle)
    owners = tuple(net.owners(a, b) for a, b in zip(cycle, cycle[1:] + cycle[:1]))
    return MinCycleRecord(cycle, owners, is_min_cycle(net, cycle, dist), is_directed_cycle(net, cycle))


def block_of_edge(net: OwnedNetwork, a: int, b: int) -> BiconnectedComponent | None:
    e = (min(a, b), max(a, b))
    for block in biconnected_components(net):
        if e in block.edges:
            return block
    return None


def min_cycle_through_edge(net: OwnedNetwork, edge, block: BiconnectedComponent | None = None,
                           dist=None) -> MinCycleRecord:
    """A shortest cycle through ``edge`` inside its biconnected component.

    The cycle is the edge plus a shortest path between its endpoints that
    avoids it; the vertex list starts at ``edge[0]`` and continues at
    ``edge[1]``.
    """
    a, b = edge
    if block is None:
        block = block_of_edge(net, a, b)
        if block is None:
            raise NoCycle(f"({a}, {b}) lies in no biconnected component")
    if (min(a, b), max(a, b)) not in block.edges:
        raise NoCycle(f"({a}, {b}) is not an edge of the component")
    path = shortest_path(block.adjacency(net.n), b, a, banned=[(a, b)])
    if path is None:
        raise NoCycle(f"removing ({a}, {b}) separates its endpoints")
    cycle = [a] + path[:-1]
    return cycle_record(net, cycle, dist)


@dataclass(frozen=True)
class CriticalPairRecord:
    v: int
    u: int
    v1: int
    v2: int
    u_prime: int
    strong: bool
    path_v_u: tuple[int, ...]
    path_v_uprime: tuple[int, ...]
    path_u_v2: tuple[int, ...] | None = None
    alternatives: int = 1

    def as_dict(self) -> dict:
        out = {
            "v": self.v, "u": self.u, "v1": self.v1, "v2": self.v2, "u_prime": self.u_prime,
            "strong": self.strong, "alternatives": self.alternatives,
            "path_v_u": list(self.path_v_u), "path_v_uprime": list(self.path_v_uprime),
        }
        if self.path_u_v2 is not None:
            out["path_u_v2"] = list(self.path_u_v2)
        return out


def _avoids_last_edge(net: OwnedNetwork, dist_src, target: int, forbidden: int) -> bool:
    """Some shortest path from the BFS source to ``target`` avoids edge (forbidden, target)."""
    dt = dist_src[target]
    return any(w != forbidden and dist_src[w] == dt - 1 for w in bits(net.adj[target]))


def _block_index(net: OwnedNetwork) -> tuple[list[BiconnectedComponent], dict]:
    blocks = biconnected_components(net)
    return blocks, {e: i for i, b in enumerate(blocks) for e in b.edges}


def is_critical_pair(net: OwnedNetwork, v: int, u: int, v1: int, v2: int, u_prime: int, dist=None) -> bool:
    """All five defining properties, checked from scratch."""
    if dist is None:
        dist = _distances(net)
    blocks, where = _block_index(net)
    e1, e2 = (min(v, v1), max(v, v1)), (min(v, v2), max(v, v2))
    if v1 == v2 or not (net.buys(v, v1) and net.buys(v, v2)):
        return False
    if e1 not in where or e2 not in where or where[e1] != where[e2]:
        return False
    block = blocks[where[e1]]
    if u == v or u not in block.vertices or u_prime not in block.vertices:
        return False
    if u_prime == v or not net.buys(u, u_prime):
        return False
    duv = dist[v][u]
    if duv is None or duv < 2:
        return False
    if dist[v1][u] != duv - 1:
        return False
    return _avoids_last_edge(net, dist[v], u_prime, u)


def is_strong(net: OwnedNetwork, v: int, u: int, v2: int, dist=None) -> bool:
    if dist is None:
        dist = _distances(net)
    return _avoids_last_edge(net, dist[u], v2, v)


def critical_pair_witnesses(net: OwnedNetwork, dist=None):
    """Yield every valid ``(v, u, v1, v2, u', strong)`` witness tuple."""
    if dist is None:
        dist = _distances(net)
    for block in biconnected_components(net):
        verts = sorted(block.vertices)
        for v in verts:
            owned = [x for x in sorted(net.strategies[v]) if (min(v, x), max(v, x)) in block.edges]
            if len(owned) < 2:
                continue
            dv = dist[v]
            for u in verts:
                if u == v or dv[u] < 2:
                    continue
                u_ok = [y for y in sorted(net.strategies[u])
                        if y != v and y in block.vertices and _avoids_last_edge(net, dv, y, u)]
                if not u_ok:
                    continue
                for v1 in owned:
                    if dist[v1][u] != dv[u] - 1:
                        continue
                    for v2 in owned:
                        if v2 == v1:
                            continue
                        strong = _avoids_last_edge(net, dist[u], v2, v)
                        for y in u_ok:
                            yield v, u, v1, v2, y, strong


def critical_pairs(net: OwnedNetwork, dist=None) -> list[CriticalPairRecord]:
    """Every critical pair, one record per ``(v, u)`` sorted by ``(v, u)``.

    The record carries the lexicographically smallest strong witness
    ``(v1, v2, u')`` if one exists, else the smallest witness overall;
    ``alternatives`` counts all valid witnesses.
    """
    if dist is None:
        dist = _distances(net)
    grouped: dict[tuple[int, int], list] = {}
    for v, u, v1, v2, y, strong in critical_pair_witnesses(net, dist):
        grouped.setdefault((v, u), []).append((not strong, v1, v2, y))
    records = []
    for (v, u), witnesses in sorted(grouped.items()):
        witnesses.sort()
        weak, v1, v2, y = witnesses[0]
        strong = not weak
        records.append(CriticalPairRecord(
            v, u, v1, v2, y, strong,
            path_v_u=tuple([v] + shortest_path(net.adj, v1, u)),
            path_v_uprime=tuple(shortest_path(net.adj, v, y, banned=[(u, y)])),
            path_u_v2=tuple(shortest_path(net.adj, u, v2, banned=[(v, v2)])) if strong else None,
            alternatives=len(witnesses),
        ))
    return records


@dataclass(frozen=True)
class ShortestPathTree:
    root: int
    parent: tuple[int, ...]
    depth: tuple[int | None, ...]

    def children(self, x: int) -> list[int]:
        return [y for y, p in enumerate(self.parent) if p == x and y != self.root]

    def descendants(self, x: int) -> frozenset[int]:
        out = {x}
        stack = [x]
        while stack:
            y = stack.pop()
            for c in self.children(y):
                out.add(c)
                stack.append(c)
        return frozenset(out)

    def path_to_root(self, x: int) -> list[int]:
        path = [x]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return path

    def edges(self) -> set[frozenset[int]]:
        return {frozenset((x, p)) for x, p in enumerate(self.parent) if p >= 0}

    def as_dict(self) -> dict:
        return {"root": self.root, "parent": list(self.parent)}


def _incident_other(root: int, edge) -> int:
    a, b = edge
    if a == root:
        return b
    if b == root:
        return a
    raise EdgeNotIncident(f"edge {edge} does not touch root {root}")


def priority_spt(net: OwnedNetwork, root: int, e1, e2) -> ShortestPathTree:
    """BFS tree from ``root`` preferring routes through ``e1``, then ``e2``.

    Every vertex with a shortest path through ``e1`` hangs below its far
    endpoint; of the remaining vertices, those with a shortest path through
    ``e2`` hang below its far endpoint; all other parent choices take the
    smallest eligible index.
    """
    v1, v2 = _incident_other(root, e1), _incident_other(root, e2)
    for x in (v1, v2):
        if not net.has_edge(root, x):
            raise EdgeNotIncident(f"({root}, {x}) is not an edge")
    d = bfs_distances(net.adj, root)
    d1 = bfs_distances(net.adj, v1)
    d2 = bfs_distances(net.adj, v2)
    cls = [0] * net.n
    for x in range(net.n):
        if d[x] is None or x == root:
            cls[x] = -1
        elif d1[x] == d[x] - 1:
            cls[x] = 1
        elif d2[x] == d[x] - 1:
            cls[x] = 2
    parent = [-1] * net.n
    for x in range(net.n):
        if cls[x] == -1:
            continue
        preds = [y for y in bits(net.adj[x]) if d[y] is not None and d[y] == d[x] - 1]
        if d[x] == 1:
            parent[x] = root
        else:
            parent[x] = min(y for y in preds if cls[y] == cls[x])
    return ShortestPathTree(root, tuple(parent), tuple(d))


def shortest_path_tree(net: OwnedNetwork, root: int, fixed: dict[int, int] | None = None,
                       avoid: dict[int, set[int]] | None = None) -> ShortestPathTree | None:
    """BFS tree with optional constraints on parents.

    ``fixed[x] = p`` forces ``p`` to be the parent of ``x``; ``avoid[x]`` lists
    forbidden parents of ``x``.  Remaining parents take the smallest eligible
    index.  Returns ``None`` when no shortest-path tree meets the constraints.
    """
    fixed = fixed or {}
    avoid = avoid or {}
    d = bfs_distances(net.adj, root)
    parent = [-1] * net.n
    for x in range(net.n):
        if x == root or d[x] is None:
            continue
        preds = [y for y in bits(net.adj[x]) if d[y] is not None and d[y] == d[x] - 1]
        if x in fixed:
            if fixed[x] not in preds or fixed[x] in avoid.get(x, ()):
                return None
            parent[x] = fixed[x]
            continue
        preds = [y for y in preds if y not in avoid.get(x, ())]
        if not preds:
            return None
        parent[x] = preds[0]
    return ShortestPathTree(root, tuple(parent), tuple(d))


@dataclass
class CoolPathWitness:
    pair: CriticalPairRecord
    path: tuple[int, ...]
    cycle1: MinCycleRecord
    cycle2: MinCycleRecord
    tree: ShortestPathTree
    u2: int = -1

    def as_dict(self) -> dict:
        return {
            "pair": self.pair.as_dict(),
            "path": list(self.path),
            "path_length": len(self.path) - 1,
            "cycle1": self.cycle1.as_dict(),
            "cycle2": self.cycle2.as_dict(),
            "tree": self.tree.as_dict(),
        }


def _orient_from(cycle: MinCycleRecord, v: int, nxt: int) -> list[int]:
    vs = list(cycle.vertices)
    i = vs.index(v)
    vs = vs[i:] + vs[:i]
    if vs[1] != nxt:
        vs = [vs[0]] + vs[:0:-1]
    return vs


def _try_cool_path(net: OwnedNetwork, block: BiconnectedComponent, v: int, a: int, b: int, dist) -> CoolPathWitness:
    c = {}
    for x, other in ((a, b), (b, a)):
        cyc = min_cycle_through_edge(net, (v, x), block, dist)
        if not cyc.is_min:
            raise NotFound("min-cycle", f"cycle through ({v}, {x}) is not a min cycle")
        if not cyc.is_directed:
            raise NotFound("min-cycle-directed", f"min cycle through ({v}, {x}) is not directed")
        if cyc.contains_edge(v, other):
            raise NotFound("min-cycle-disjoint", f"min cycle through ({v}, {x}) also uses ({v}, {other})")
        c[x] = cyc
    tree = priority_spt(net, v, (v, a), (v, b))
    desc = {a: tree.descendants(a), b: tree.descendants(b)}
    far = {}
    for x in (a, b):
        order = _orient_from(c[x], v, x)
        idx = [j for j in range(1, len(order)) if order[j] in desc[x]]
        if not idx:
            raise NotFound("farthest-descendant", f"no vertex of the cycle through ({v}, {x}) descends from {x}")
        j = max(idx)
        ui, ui_next = order[j], order[(j + 1) % len(order)]
        if dist[v][ui_next] > dist[v][ui]:
            raise NotFound("successor-distance", f"d({v},{ui_next}) > d({v},{ui})")
        far[x] = (ui, ui_next)
    v1, v2 = a, b
    if dist[v][far[b][0]] > dist[v][far[a][0]]:
        v1, v2 = b, a
    u, u_prime = far[v1]
    if not is_critical_pair(net, v, u, v1, v2, u_prime, dist):
        raise NotFound("critical-pair", f"<{v}, {u}> fails the critical pair definition")
    order2 = _orient_from(c[v2], v, v2)
    path = tuple([v] + order2[:0:-1])
    uses = {frozenset(e) for e in zip(path, path[1:])}
    if frozenset((v, v1)) in uses or frozenset((v, v2)) in uses:
        raise NotFound("path-avoidance", "path uses one of v's edges")
    if len(path) - 1 > 2 * dist[u][v]:
        raise NotFound("path-length", f"|P| = {len(path) - 1} > 2 d(u, v) = {2 * dist[u][v]}")
    strong = is_strong(net, v, u, v2, dist)
    pair = CriticalPairRecord(
        v, u, v1, v2, u_prime, strong,
        path_v_u=tuple(tree.path_to_root(u)[::-1]),
        path_v_uprime=tuple(tree.path_to_root(u_prime)[::-1]),
        path_u_v2=tuple(shortest_path(net.adj, u, v2, banned=[(v, v2)])) if strong else None,
    )
    return CoolPathWitness(pair, path, c[v1], c[v2], tree, u2=far[v2][0])


def cool_path_witness(net: OwnedNetwork) -> CoolPathWitness:
    """Run the cool-path construction on ``net``; raises :class:`NotFound`.

    Candidates ``v`` buying two edges of one component are tried in index
    order, each with its owned component edges taken pairwise in order; the
    first complete construction is returned.
    """
    blocks = biconnected_components(net)
    if not blocks:
        raise NotFound("no-biconnected-component", "network is a forest")
    dist = _distances(net)
    attempts = []
    for block in blocks:
        for v in sorted(block.vertices):
            owned = [x for x in sorted(net.strategies[v]) if (min(v, x), max(v, x)) in block.edges]
            for i, a in enumerate(owned):
                for b in owned[i + 1:]:
                    try:
                        return _try_cool_path(net, block, v, a, b, dist)
                    except NotFound as exc:
                        attempts.append({"v": v, "v1": a, "v2": b, "step": exc.step, "detail": exc.detail})
    if not attempts:
        raise NotFound("no-double-buyer", "no vertex buys two edges of one component")
    first = attempts[0]
    raise NotFound(first["step"], first["detail"], attempts)


def simple_cycles(net: OwnedNetwork, max_len: int | None = None) -> list[tuple[int, ...]]:
    """All simple cycles, each listed once from its smallest vertex."""
    out = []
    n = net.n
    limit = max_len or n
    for s in range(n):
        stack = [(s, [s], 1 << s)]
        while stack:
            x, path, seen = stack.pop()
            for y in bits(net.adj[x]):
                if y == s and len(path) >= 3 and path[1] < path[-1]:
                    out.append(tuple(path))
                elif y > s and not seen >> y & 1 and len(path) < limit:
                    stack.append((y, path + [y], seen | 1 << y))
    out.sort(key=lambda c: (len(c), c))
    return out


def has_cycle_of_length(net: OwnedNetwork, k: int) -> bool:
    return any(len(c) == k for c in simple_cycles(net, k))
