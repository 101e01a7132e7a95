"""Costs, deviations, best responses and equilibrium certificates.

All cost comparisons are exact.  The edge price is a :class:`fractions.Fraction`
and costs are compared after scaling by its denominator, so integer arithmetic
decides every tie.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .graph import INF, OwnedNetwork, bfs_sum, bits

DEFAULT_EXACT_CAP = 12

EXACT = "exact"
SINGLE_MOVE = "single-move"
MODES = (EXACT, SINGLE_MOVE)


class CapExceeded(ValueError):
    pass


class IllegalStrategy(ValueError):
    pass


_ALPHA_RE = re.compile(r"^\s*(\d+(\.\d*)?|\.\d+|\d+\s*/\s*\d+)\s*$")


def parse_alpha(value) -> Fraction:
    """Exact edge price from ``"p/q"``, a decimal string, an int or a Fraction.

    Binary floats are rejected: ``0.1`` has no exact float value.
    """
    if isinstance(value, Fraction):
        alpha = value
    elif isinstance(value, int):
        alpha = Fraction(value)
    elif isinstance(value, str):
        if not _ALPHA_RE.match(value):
            raise ValueError(f"cannot read edge price {value!r}; use p/q or a decimal")
        try:
            alpha = Fraction(value.replace(" ", ""))
        except ZeroDivisionError:
            raise ValueError(f"edge price {value!r} has a zero denominator") from None
    else:
        raise TypeError(f"edge price must be str, int or Fraction, not {type(value).__name__}")
    if alpha < 0:
        raise ValueError("edge price must be nonnegative")
    return alpha


def format_alpha(alpha: Fraction) -> str:
    return str(alpha.numerator) if alpha.denominator == 1 else f"{alpha.numerator}/{alpha.denominator}"


@dataclass(frozen=True)
class CostBreakdown:
    creation: Fraction
    distance: object  # int or INF
    total: object  # Fraction or INF


def agent_cost(net: OwnedNetwork, alpha, u: int) -> CostBreakdown:
    alpha = parse_alpha(alpha)
    creation = alpha * len(net.strategies[u])
    first = net.adj[u]
    d = bfs_sum(net.adj, u, first, net.full_mask) if net.n > 1 else 0
    if d is None:
        return CostBreakdown(creation, INF, INF)
    return CostBreakdown(creation, d, creation + d)


def social_cost(net: OwnedNetwork, alpha):
    alpha = parse_alpha(alpha)
    total = Fraction(0)
    for u in range(net.n):
        c = agent_cost(net, alpha, u).total
        if c is INF:
            return INF
        total += c
    return total


def distance_costs(net: OwnedNetwork) -> list:
    out = []
    for u in range(net.n):
        d = bfs_sum(net.adj, u, net.adj[u], net.full_mask) if net.n > 1 else 0
        out.append(INF if d is None else d)
    return out


@dataclass(frozen=True)
class Deviation:
    agent: int
    kind: str
    added: tuple[int, ...]
    removed: tuple[int, ...]
    strategy: frozenset[int]

    @classmethod
    def to(cls, net: OwnedNetwork, agent: int, strategy) -> "Deviation":
        strategy = frozenset(strategy)
        old = net.strategies[agent]
        added = tuple(sorted(strategy - old))
        removed = tuple(sorted(old - strategy))
        if not added and removed:
            kind = "delete"
        elif added and not removed:
            kind = "buy"
        elif len(added) == 1 and len(removed) == 1:
            kind = "swap"
        elif len(added) == 1 and len(removed) == 2:
            kind = "swap+delete"
        else:
            kind = "replace"
        return cls(agent, kind, added, removed, strategy)

    @classmethod
    def swap(cls, net: OwnedNetwork, agent: int, old: int, new: int, delete: tuple[int, ...] = ()) -> "Deviation":
        strategy = (net.strategies[agent] - {old} - set(delete)) | {new}
        return cls.to(net, agent, strategy)

    def as_dict(self) -> dict:
        return {
            "agent": self.agent,
            "kind": self.kind,
            "added": list(self.added),
            "removed": list(self.removed),
            "strategy": sorted(self.strategy),
        }


def apply_deviation(net: OwnedNetwork, dev: Deviation) -> OwnedNetwork:
    if dev.agent in dev.strategy:
        raise IllegalStrategy(f"agent {dev.agent} cannot buy an edge to itself")
    if any(not 0 <= x < net.n for x in dev.strategy):
        raise IllegalStrategy("strategy names an unknown agent")
    return net.with_strategy(dev.agent, dev.strategy)


@dataclass(frozen=True)
class EquilibriumCertificate:
    verdict: str
    mode: str
    witness: Deviation | None = None
    improvement: object = None  # Fraction or INF

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"

    def as_dict(self) -> dict:
        out = {"verdict": self.verdict, "mode": self.mode}
        if self.witness is not None:
            out["witness"] = self.witness.as_dict()
            imp = self.improvement
            out["improvement"] = "inf" if imp is INF else format_alpha(imp)
        return out


# -- strategy spaces ---------------------------------------------------------

def _check_mode(net: OwnedNetwork, mode: str, cap: int) -> None:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == EXACT and net.n > cap:
        raise CapExceeded(f"exact best response needs n <= {cap}, got n = {net.n}")


def _mask(vertices) -> int:
    m = 0
    for x in vertices:
        m |= 1 << x
    return m


def _all_subsets(net: OwnedNetwork, u: int) -> Iterator[int]:
    others = [1 << x for x in range(net.n) if x != u]
    masks = [0]
    for b in others:
        masks += [m | b for m in masks]
    return iter(masks)


def _single_moves(net: OwnedNetwork, u: int) -> Iterator[int]:
    cur = _mask(net.strategies[u])
    free = net.full_mask & ~cur & ~(1 << u)
    yield cur
    owned = list(bits(cur))
    for x in owned:
        yield cur & ~(1 << x)
    for y in bits(free):
        yield cur | 1 << y
    for x in owned:
        for y in bits(free):
            base = cur & ~(1 << x) | 1 << y
            yield base
            for z in owned:
                if z != x:
                    yield base & ~(1 << z)


def strategy_space(net: OwnedNetwork, u: int, mode: str = EXACT, cap: int = DEFAULT_EXACT_CAP) -> Iterator[int]:
    """Candidate strategies of ``u`` as vertex bitmasks."""
    _check_mode(net, mode, cap)
    return _all_subsets(net, u) if mode == EXACT else _single_moves(net, u)


class _AgentView:
    """Distance cost of one agent as a function of her strategy."""

    def __init__(self, net: OwnedNetwork, u: int):
        self.net = net
        self.u = u
        self.fixed = _mask(x for x in range(net.n) if u in net.strategies[x])
        self.current = _mask(net.strategies[u])
        self._memo: dict[int, int | None] = {}

    def distance(self, strategy: int) -> int | None:
        first = self.fixed | strategy
        d = self._memo.get(first, -1)
        if d == -1:
            net = self.net
            d = bfs_sum(net.adj, self.u, first, net.full_mask) if net.n > 1 else 0
            self._memo[first] = d
        return d


def _key(cost_scaled, strategy: int):
    # INF sorts last; then fewer edges, then lexicographically smallest target list
    return (cost_scaled is None, 0 if cost_scaled is None else cost_scaled, strategy.bit_count(), list(bits(strategy)))


def _best_scaled(net: OwnedNetwork, alpha: Fraction, u: int, mode: str, cap: int):
    p, q = alpha.numerator, alpha.denominator
    view = _AgentView(net, u)
    best = None
    for s in strategy_space(net, u, mode, cap):
        d = view.distance(s)
        c = None if d is None else p * s.bit_count() + q * d
        key = _key(c, s)
        if best is None or key < best[0]:
            best = (key, s, c)
    cur_d = view.distance(view.current)
    cur = None if cur_d is None else p * view.current.bit_count() + q * cur_d
    return best[1], best[2], cur


def _unscale(c, q: int):
    return INF if c is None else Fraction(c, q)


def best_response(net: OwnedNetwork, alpha, u: int, mode: str = EXACT, cap: int = DEFAULT_EXACT_CAP):
    """Cost-minimising strategy of ``u`` within the mode's search space.

    Returns ``(strategy, total_cost)``.  Ties prefer fewer edges, then the
    lexicographically smallest sorted target list.
    """
    alpha = parse_alpha(alpha)
    s, c, _ = _best_scaled(net, alpha, u, mode, cap)
    return frozenset(bits(s)), _unscale(c, alpha.denominator)


def _improves(new, cur) -> bool:
    if new is None:
        return False
    return cur is None or new < cur


def is_equilibrium(net: OwnedNetwork, alpha, mode: str = EXACT, cap: int = DEFAULT_EXACT_CAP) -> EquilibriumCertificate:
    alpha = parse_alpha(alpha)
    _check_mode(net, mode, cap)
    for u in range(net.n):
        s, new, cur = _best_scaled(net, alpha, u, mode, cap)
        if _improves(new, cur):
            dev = Deviation.to(net, u, bits(s))
            imp = INF if cur is None else Fraction(cur - new, alpha.denominator)
            return EquilibriumCertificate("unstable", mode, dev, imp)
    return EquilibriumCertificate("stable", mode)


def is_stable(net: OwnedNetwork, alpha, mode: str = EXACT, cap: int = DEFAULT_EXACT_CAP) -> bool:
    """Stability verdict only; stops at the first strictly improving strategy."""
    alpha = parse_alpha(alpha)
    _check_mode(net, mode, cap)
    p, q = alpha.numerator, alpha.denominator
    for u in range(net.n):
        view = _AgentView(net, u)
        cur_d = view.distance(view.current)
        cur = None if cur_d is None else p * view.current.bit_count() + q * cur_d
        for s in strategy_space(net, u, mode, cap):
            d = view.distance(s)
            if d is not None and (cur is None or p * s.bit_count() + q * d < cur):
                return False
    return True


def stability_interval(net: OwnedNetwork, mode: str = EXACT, cap: int = DEFAULT_EXACT_CAP,
                       within: tuple | None = None):
    """Closed set of edge prices at which ``net`` is stable, as ``(lo, hi)``.

    ``hi`` may be ``INF``; ``None`` means stable for no price.  Each agent's
    alternative strategy with ``k`` edges and distance cost ``D`` constrains
    the price linearly: ``alpha * (k - s) >= d - D`` where ``s``, ``d`` describe
    the current strategy.  ``within=(lo, hi)`` restricts attention to a price
    window and allows an early exit once the window is empty.
    """
    _check_mode(net, mode, cap)
    lo, hi = Fraction(0), INF
    if within is not None:
        lo = max(lo, Fraction(within[0]))
        if within[1] is not INF:
            hi = Fraction(within[1])
    views = [_AgentView(net, u) for u in range(net.n)]
    # cheap single deletions first: they bound the price from above
    for view in views:
        d0 = view.distance(view.current)
        if d0 is None:
            continue
        for x in bits(view.current):
            d = view.distance(view.current & ~(1 << x))
            if d is not None:
                bound = Fraction(d - d0)
                if bound < hi:
                    hi = bound
                    if hi < lo:
                        return None
    for view in views:
        d0 = view.distance(view.current)
        s0 = view.current.bit_count()
        for s in strategy_space(net, view.u, mode, cap):
            d = view.distance(s)
            if d is None:
                continue
            if d0 is None:
                return None
            k = s.bit_count()
            if k > s0:
                bound = Fraction(d0 - d, k - s0)
                if bound > lo:
                    lo = bound
            elif k < s0:
                bound = Fraction(d - d0, s0 - k)
                if bound < hi:
                    hi = bound
            elif d < d0:
                return None
            if hi is not INF and hi < lo:
                return None
    return lo, hi


def in_interval(alpha: Fraction, interval) -> bool:
    if interval is None:
        return False
    lo, hi = interval
    return lo <= alpha and (hi is INF or alpha <= hi)


@dataclass
class Step:
    deviation: Deviation
    social_cost: object


@dataclass
class Trajectory:
    start: OwnedNetwork
    final: OwnedNetwork
    steps: list[Step] = field(default_factory=list)
    converged: bool = False
    rounds: int = 0


def best_response_dynamics(net: OwnedNetwork, alpha, schedule: str = "round-robin", max_rounds: int = 100,
                           seed: int = 0, mode: str = EXACT, cap: int = DEFAULT_EXACT_CAP) -> Trajectory:
    """Apply strictly improving best responses until a full pass changes nothing."""
    alpha = parse_alpha(alpha)
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    if schedule not in ("round-robin", "seeded-random"):
        raise ValueError(f"unknown schedule {schedule!r}")
    _check_mode(net, mode, cap)
    rng = random.Random(seed)
    traj = Trajectory(start=net, final=net)
    order = list(range(net.n))
    for _ in range(max_rounds):
        traj.rounds += 1
        if schedule == "seeded-random":
            rng.shuffle(order)
        changed = False
        for u in order:
            s, new, cur = _best_scaled(net, alpha, u, mode, cap)
            if _improves(new, cur):
                dev = Deviation.to(net, u, bits(s))
                net = apply_deviation(net, dev)
                traj.steps.append(Step(dev, social_cost(net, alpha)))
                changed = True
        if not changed:
            traj.converged = True
            break
    traj.final = net
    return traj
