"""Closed-form thresholds and price-of-anarchy bounds, in exact arithmetic."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .game import format_alpha, parse_alpha


class DomainError(ValueError):
    pass


LITERATURE = (
    "all equilibria are trees for alpha >= 12 n log n (Albers et al.)",
    "all equilibria are trees for alpha > 273 n (Mihalak, Schlegel)",
    "all equilibria are trees for alpha >= 65 n (Mamageishvili et al.)",
    "claimed: all equilibria are trees for alpha > 17 n (Alvarez, Messegue)",
    "general PoA upper bound 2^O(sqrt(log n)) (Demaine et al.)",
    "PoA of equilibrium trees at most 5 (Fabrikant et al.)",
)


def no_triangle_threshold(n: int) -> Fraction:
    return Fraction(n - 1, 2)


def no_square_threshold(n: int) -> Fraction:
    return Fraction(n - 2)


def no_strong_pair_threshold(n: int) -> Fraction:
    return Fraction(2 * n - 6)


def tree_threshold(n: int) -> Fraction:
    if n < 4:
        raise DomainError("the tree threshold is stated for n >= 4")
    return Fraction(4 * n - 13)


def opt_social_cost(n: int, alpha) -> Fraction:
    """Social cost of the star, optimal for alpha >= 2."""
    alpha = parse_alpha(alpha)
    if n < 2 or alpha < 2:
        raise DomainError("optimum is the star only for alpha >= 2 and n >= 2")
    return (2 * n + alpha - 2) * (n - 1)


def tree_poa_bound(n: int, alpha) -> Fraction:
    alpha = parse_alpha(alpha)
    if n < 3 or alpha < 2:
        raise DomainError("equilibrium-tree PoA bound needs alpha >= 2 and n >= 3")
    return 3 + (2 * n * n - 8 * n - 4 * alpha) / (2 * n * n + (alpha - 2) * n)


def corollary_poa_bound(n: int, alpha) -> Fraction:
    alpha = parse_alpha(alpha)
    if n < 1 or alpha <= 0:
        raise DomainError("needs n >= 1 and alpha > 0")
    return 3 + Fraction(2 * n) / (2 * n + alpha)


def stable_tree_depth_diameter(n: int, alpha) -> tuple[Fraction, Fraction]:
    alpha = parse_alpha(alpha)
    if n < 2:
        raise DomainError("needs n >= 2")
    return alpha / n + 4, 2 * alpha / n + 8


def subtree_size_lower_bound(n: int, i: int) -> Fraction:
    """``n * (1/2 + ... + 1/2**i)``."""
    if i < 1:
        raise DomainError("path index starts at 1")
    return n * (1 - Fraction(1, 2 ** i))


@dataclass(frozen=True)
class BoundsTable:
    n: int
    alpha: Fraction
    thresholds: dict
    bounds: dict
    domain: dict

    def as_dict(self) -> dict:
        def fmt(x):
            return None if x is None else format_alpha(x)
        return {
            "schema": 1,
            "n": self.n,
            "alpha": format_alpha(self.alpha),
            "thresholds": {k: fmt(v) for k, v in self.thresholds.items()},
            "bounds": {k: fmt(v) for k, v in self.bounds.items()},
            "decimal": {k: None if v is None else float(v) for k, v in {**self.thresholds, **self.bounds}.items()},
            "domain": self.domain,
            "literature": list(LITERATURE),
        }


def _guard(fn, *args):
    try:
        return fn(*args)
    except DomainError:
        return None


def bounds_table(n: int, alpha) -> BoundsTable:
    alpha = parse_alpha(alpha)
    thresholds = {
        "no_3_cycle": no_triangle_threshold(n),
        "no_4_cycle": no_square_threshold(n),
        "no_strong_critical_pair": no_strong_pair_threshold(n),
        "tree": _guard(tree_threshold, n),
    }
    depth_diam = _guard(stable_tree_depth_diameter, n, alpha)
    bounds = {
        "opt_social_cost": _guard(opt_social_cost, n, alpha),
        "tree_poa_bound": _guard(tree_poa_bound, n, alpha),
        "corollary_poa_bound": _guard(corollary_poa_bound, n, alpha),
        "stable_tree_depth": depth_diam[0] if depth_diam else None,
        "stable_tree_diameter": depth_diam[1] if depth_diam else None,
    }
    domain = {k: v is not None for k, v in {**thresholds, **bounds}.items()}
    domain["all_equilibria_trees"] = thresholds["tree"] is not None and alpha > thresholds["tree"]
    return BoundsTable(n, alpha, thresholds, bounds, domain)
