"""End-to-end acceptance checks, one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s``; the lines are printed even
without ``-s``.
"""
import contextlib
import io
import json
import random
import time
from fractions import Fraction

import pytest

from ncgame.bounds import opt_social_cost, stable_tree_depth_diameter, tree_poa_bound
from ncgame.canon import connected_graphs
from ncgame.cli import main
from ncgame.enumeration import GRAPH, PROFILE, EnumerationSpec, enumerate_profiles, find_equilibria_multi, scan_profiles
from ncgame.game import (
    EXACT,
    SINGLE_MOVE,
    Deviation,
    _AgentView,
    agent_cost,
    apply_deviation,
    best_response,
    best_response_dynamics,
    in_interval,
    is_equilibrium,
    social_cost,
    stability_interval,
    strategy_space,
)
from ncgame.graph import INF, OwnedNetwork, bfs_distances, biconnected_components, bits, centroids
from ncgame.harness import LEMMAS
from ncgame.oracles import ORACLES, proof_deviation_oracle, random_network, sample_instance
from ncgame.structure import critical_pair_witnesses, is_min_cycle, min_cycle_through_edge

pytestmark = pytest.mark.slow


def verdict(capsys, number: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


def cli(argv) -> tuple[int, str]:
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(argv)
    return code, out.getvalue()


def test_equilibria_are_trees_at_four(capsys):
    start = time.perf_counter()
    alphas = (Fraction(13, 4), 4, 8, 20)
    found = find_equilibria_multi(EnumerationSpec(4, alphas, EXACT, PROFILE))
    elapsed = time.perf_counter() - start
    counts = {a: len(found[a]) for a in found}
    non_tree = sum(not r.is_tree for recs in found.values() for r in recs)
    ok = all(c >= 1 for c in counts.values()) and non_tree == 0 and elapsed < 10
    detail = ", ".join(f"alpha={a}: {c} equilibria" for a, c in counts.items())
    verdict(capsys, 1, ok, f"n=4 exact over all 4096 profiles; {detail}; non-tree {non_tree}; {elapsed:.1f}s")


def test_equilibria_are_trees_at_five(capsys):
    start = time.perf_counter()
    spec = EnumerationSpec(5, (Fraction(15, 2), 10), EXACT, GRAPH, dedupe=True)
    found = find_equilibria_multi(spec)
    elapsed = time.perf_counter() - start
    non_tree = sum(not r.is_tree for recs in found.values() for r in recs)
    counts = {str(a): len(recs) for a, recs in found.items()}
    ok = non_tree == 0 and elapsed < 600
    verdict(capsys, 2, ok, f"n=5 graph route with dedupe; equilibria {counts}; non-tree {non_tree}; {elapsed:.1f}s")


def _grid(threshold: Fraction, n: int) -> list[Fraction]:
    return sorted({threshold + Fraction(1, 4), threshold + 1, threshold + 3, Fraction(4 * n)})


def test_lemma_suite(capsys):
    plan = [(lemma, n) for n in (4, 5, 6) for lemma in ("L1", "L2", "L5")] + [("L3", 6), ("C1", 6)]
    failures = []
    checked = 0
    start = time.perf_counter()
    for lemma_id, n in plan:
        lemma = LEMMAS[lemma_id]
        alphas = _grid(lemma.threshold_value(n), n)
        argv = ["verify-lemma", lemma_id, "--n", str(n), "--alpha", ",".join(str(a) for a in alphas)]
        if n == 6:
            argv += ["--route", GRAPH]
        code, out = cli(argv)
        reports = json.loads(out)["reports"]
        checked += len(reports)
        bad = [r for r in reports if r["status"] != "verified" or r["violations"]]
        if code != 0 or bad:
            failures.append((lemma_id, n, code, [r["alpha"] for r in bad]))
    elapsed = time.perf_counter() - start
    verdict(capsys, 3, not failures,
            f"{len(plan)} lemma/size runs, {checked} prices above threshold, failures {failures}; {elapsed:.1f}s")


def _both_owner(adj) -> OwnedNetwork:
    return OwnedNetwork(len(adj), tuple(frozenset(bits(m)) for m in adj))


def _non_strong_pairs_exist(n: int) -> int:
    """Graphs on ``n`` vertices admitting a non-strong critical pair under some ownership.

    Letting every agent buy every incident edge makes every ownership-dependent
    condition as permissive as possible while the distance conditions stay put.
    """
    return sum(
        any(not w[5] for w in critical_pair_witnesses(_both_owner(adj)))
        for adj in connected_graphs(n)
    )


def test_proof_deviation_oracles(capsys):
    samples = 10_000
    start = time.perf_counter()
    failures = []
    improving = {}
    vacuous = []
    for n in range(6, 10):
        for oracle in ORACLES:
            if oracle == "T1" and n == 6:
                if _non_strong_pairs_exist(6) == 0:
                    vacuous.append(6)
                    continue
            rng = random.Random(1000 * n + ORACLES.index(oracle))
            hits = 0
            for _ in range(samples):
                net, params, alpha = sample_instance(oracle, rng, n)
                out = proof_deviation_oracle(oracle, net, alpha, **params)
                if not out.bound_holds:
                    failures.append((oracle, n, net.bought_edges, params, out.checks))
                hits += out.improving
            improving[(oracle, n)] = hits
    elapsed = time.perf_counter() - start
    runs = len(improving)
    note = (f"; T1 at n=6 vacuous: exhaustive check finds no non-strong critical pair in any of the "
            f"{len(connected_graphs(6))} connected graphs" if vacuous else "")
    verdict(capsys, 4, not failures,
            f"{runs} oracle/size runs x {samples} instances, bound failures {len(failures)}{note}; {elapsed:.1f}s")


def test_min_cycles(capsys):
    start = time.perf_counter()
    graphs = edges = 0
    failures = []
    for n in range(1, 8):
        for adj in connected_graphs(n):
            graphs += 1
            net = OwnedNetwork(n, tuple(frozenset(x for x in bits(m) if x > v) for v, m in enumerate(adj)))
            dist = [bfs_distances(net.adj, s) for s in range(n)]
            for block in biconnected_components(net):
                for e in sorted(block.edges):
                    edges += 1
                    rec = min_cycle_through_edge(net, e, block, dist)
                    if not (rec.contains_edge(*e) and is_min_cycle(net, rec.vertices, dist)):
                        failures.append((adj, e))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 300
    verdict(capsys, 5, ok, f"{graphs} connected graphs on <= 7 vertices, {edges} block edges, "
                           f"failures {len(failures)}; {elapsed:.1f}s")


TREE_RUNS = [(4, EXACT, PROFILE), (5, EXACT, GRAPH), (6, SINGLE_MOVE, GRAPH), (7, SINGLE_MOVE, GRAPH),
             (8, SINGLE_MOVE, GRAPH)]


@pytest.fixture(scope="module")
def stable_trees():
    """Every (tree, price) pair to check: a price grid from 2 plus each tree's interval endpoints."""
    pairs = []
    for n, mode, route in TREE_RUNS:
        top = Fraction(100 * n)
        spec = EnumerationSpec(n, (Fraction(2), top), mode, route, dedupe=True, trees_only=True)
        grid = [Fraction(k, 2) for k in range(4, 20 * n + 1)] + [top]
        for net, _ in scan_profiles(spec)[0]:
            lo, hi = stability_interval(net, mode)
            prices = {a for a in grid if in_interval(a, (lo, hi))} | {max(lo, Fraction(2))}
            if hi is not INF and hi >= 2:
                prices.add(hi)
            pairs += [(net, a, mode) for a in sorted(prices) if in_interval(a, (lo, hi))]
    return pairs


def test_tree_price_of_anarchy(capsys, stable_trees):
    failures = []
    worst = Fraction(0)
    for net, alpha, _ in stable_trees:
        ratio = social_cost(net, alpha) / opt_social_cost(net.n, alpha)
        bound = tree_poa_bound(net.n, alpha)
        worst = max(worst, ratio)
        if not ratio <= bound <= 4 <= 5:
            failures.append((net.bought_edges, alpha, ratio, bound))
    sizes = sorted({net.n for net, _, _ in stable_trees})
    verdict(capsys, 6, not failures and bool(stable_trees),
            f"{len(stable_trees)} (stable tree, price) pairs for n in {sizes}; worst ratio "
            f"{float(worst):.4f}; violations {len(failures)}")


def test_centroid_lemmas(capsys, stable_trees):
    failures = []
    for net, alpha, _ in stable_trees:
        findings = LEMMAS["L9"].predicate(net, alpha) + LEMMAS["L10"].predicate(net, alpha)
        depth_bound, diam_bound = stable_tree_depth_diameter(net.n, alpha)
        for c in centroids(net).centroids:
            if max(bfs_distances(net.adj, c)) > depth_bound:
                findings.append({"centroid": c, "depth_bound": depth_bound})
        diameter = max(max(bfs_distances(net.adj, s)) for s in range(net.n))
        if diameter > diam_bound:
            findings.append({"diameter": diameter})
        if findings:
            failures.append((net.bought_edges, alpha, findings))
    verdict(capsys, 7, not failures and bool(stable_trees),
            f"{len(stable_trees)} pairs: centroid orientation, partial sums, depth and diameter; "
            f"violations {len(failures)}")


def _recomputation_mismatches(net: OwnedNetwork, alpha, mode: str) -> tuple[int, int]:
    checked = bad = 0
    for u in range(net.n):
        view = _AgentView(net, u)
        for s in strategy_space(net, u, mode):
            dev = Deviation.to(net, u, bits(s))
            d = view.distance(s)
            fresh = agent_cost(apply_deviation(net, dev), alpha, u)
            checked += 1
            bad += (INF if d is None else d) != fresh.distance
        strategy, cost = best_response(net, alpha, u, mode)
        fresh = agent_cost(apply_deviation(net, Deviation.to(net, u, strategy)), alpha, u).total
        checked += 1
        bad += cost != fresh
    cert = is_equilibrium(net, alpha, mode)
    if cert.witness is not None:
        u = cert.witness.agent
        before = agent_cost(net, alpha, u).total
        after = agent_cost(apply_deviation(net, cert.witness), alpha, u).total
        gain = INF if before is INF else before - after
        checked += 1
        bad += gain is not cert.improvement if gain is INF else gain != cert.improvement
    return checked, bad


def _byte_identical(argv) -> bool:
    outputs = {cli(argv + ["--workers", str(w)])[1] for w in (1, 8)}
    return len(outputs) == 1


def test_engine_self_consistency(capsys):
    start = time.perf_counter()
    alphas = tuple(Fraction(k, 4) for k in (1, 2, 4, 6, 8, 12, 13, 16, 32, 80))
    by_profile = find_equilibria_multi(EnumerationSpec(4, alphas, EXACT, PROFILE))
    by_graph = find_equilibria_multi(EnumerationSpec(4, alphas, EXACT, GRAPH))
    routes_agree = all(
        {r.network for r in by_profile[a]} == {r.network for r in by_graph[a]} for a in alphas
    )

    checked = bad = 0
    rng = random.Random(8)
    for net in enumerate_profiles(EnumerationSpec(4, route=PROFILE)):
        c, b = _recomputation_mismatches(net, Fraction(rng.randrange(1, 40), 4), EXACT)
        checked, bad = checked + c, bad + b
    for _ in range(200):
        n = rng.randrange(5, 9)
        net = random_network(rng, n, rng.randrange(n))
        c, b = _recomputation_mismatches(net, Fraction(rng.randrange(1, 80), 4), SINGLE_MOVE)
        checked, bad = checked + c, bad + b
    for _ in range(100):
        n = rng.randrange(3, 7)
        alpha = Fraction(rng.randrange(1, 40), 4)
        traj = best_response_dynamics(random_network(rng, n, rng.randrange(n)), alpha, "seeded-random",
                                      seed=rng.getrandbits(64))
        cur = traj.start
        for step in traj.steps:
            cur = apply_deviation(cur, step.deviation)
            checked += 1
            bad += step.social_cost != social_cost(cur, alpha)

    runs = [
        ["enumerate", "--n", "5", "--alpha", "1/2,2,15/2"],
        ["verify-lemma", "L5", "--n", "5", "--alpha", "5,10"],
        ["search", "--n", "6", "--alpha", "3", "--budget", "30", "--seed", "11"],
    ]
    identical = all(_byte_identical(argv) for argv in runs)
    elapsed = time.perf_counter() - start
    ok = routes_agree and bad == 0 and identical
    verdict(capsys, 8, ok,
            f"routes agree at n=4 over {len(alphas)} prices: {routes_agree}; {checked} cost recomputations, "
            f"{bad} mismatches; JSON byte-identical for 1 vs 8 workers: {identical}; {elapsed:.1f}s")
