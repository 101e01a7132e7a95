import random
from fractions import Fraction

import pytest

from helpers import cycle, path
from ncgame.game import apply_deviation, agent_cost
from ncgame.graph import build_network
from ncgame.oracles import (
    ORACLES,
    HypothesisUnmet,
    find_induced_square,
    find_triangle,
    proof_deviation_oracle,
    sample_instance,
    sample_tree_pair,
)
from ncgame.structure import critical_pairs

THETA = build_network(8, [(2, 0), (1, 2), (0, 3), (3, 4), (4, 1), (0, 5), (5, 6), (6, 7), (7, 1)])


def test_triangle_with_padding():
    rng = random.Random(3)
    net, params, _ = sample_instance("L1", rng, 6)
    out = proof_deviation_oracle("L1", net, 4, **params)
    assert out.bound_holds and out.improving
    assert out.deviations[0].kind == "delete"


def test_triangle_below_threshold_not_improving():
    out = proof_deviation_oracle("L1", cycle(3), "1/2")
    assert out.bound_holds and not out.improving


def test_square_double_owner_at_price_n():
    net = build_network(6, [(0, 1), (0, 3), (1, 2), (2, 3), (4, 0), (5, 2)])
    out = proof_deviation_oracle("L2", net, 6)
    assert out.deviations[0].kind == "swap+delete"
    assert out.bound_holds and out.improving
    assert out.info["case"] == "double-owner"


def test_directed_square():
    out = proof_deviation_oracle("L2", cycle(4), 3)
    assert out.info["case"] == "directed" and out.bound_holds and out.improving


def test_strong_pair_on_theta():
    (pair,) = [p for p in critical_pairs(THETA) if p.strong]
    args = (pair.v, pair.u, pair.v1, pair.v2, pair.u_prime)
    out = proof_deviation_oracle("L5", THETA, 2 * 8 - 5, pair=args)
    assert len(out.deviations) == 2
    assert out.checks["u_distance_within_far_plus_n_minus_3"]
    assert out.checks["v_distance_within_far_plus_n_minus_3"]
    assert out.bound_holds and out.improving


def test_far_swap():
    net = path(5)
    out = proof_deviation_oracle("L4", net, 3, a=0, a_prime=1, b=3)
    assert out.bound_holds
    assert out.deviations[0].strategy == {3}


def test_tree_oracle_on_planted_instance():
    net, params = sample_tree_pair(random.Random(11), 8)
    out = proof_deviation_oracle("T1", net, 4 * 8 - 13 + Fraction(1, 2), **params)
    assert out.bound_holds and out.improving
    assert out.deviations[0].kind == "swap+delete"
    assert out.info["depth_times_subtree"] <= out.info["depth_times_subtree_limit"]


@pytest.mark.parametrize("oracle,net,params,step", [
    ("L1", path(4), {}, "triangle"),
    ("L1", build_network(4, [(0, 1), (1, 2), (2, 0)]), {}, "connected"),
    ("L2", cycle(3), {}, "square"),
    ("L2", build_network(4, [(0, 1), (1, 2), (2, 3), (3, 0), (1, 0)]), {"square": (0, 1, 2, 3)}, "single-owner"),
    ("L4", path(3), {"a": 0, "a_prime": 1, "b": 1}, "distinct"),
    ("L4", path(3), {"a": 1, "a_prime": 0, "b": 2}, "owns-edge"),
    ("L5", cycle(5), {"pair": (0, 2, 1, 4, 3)}, "critical-pair"),
    ("T1", THETA, {"pair": (0, 7, 5, 3, 1)}, "not-strong"),
])
def test_hypothesis_unmet_names_step(oracle, net, params, step):
    with pytest.raises(HypothesisUnmet) as exc:
        proof_deviation_oracle(oracle, net, 10, **params)
    assert exc.value.step == step


def test_unknown_oracle():
    with pytest.raises(KeyError):
        proof_deviation_oracle("L6", path(3), 1)


def test_gains_match_recomputation():
    rng = random.Random(5)
    for oracle in ORACLES:
        for _ in range(20):
            net, params, alpha = sample_instance(oracle, rng, 7)
            out = proof_deviation_oracle(oracle, net, alpha, **params)
            for dev, gain in zip(out.deviations, out.gains):
                after = apply_deviation(net, dev)
                assert gain == agent_cost(net, alpha, dev.agent).total - agent_cost(after, alpha, dev.agent).total


@pytest.mark.parametrize("oracle", ORACLES)
def test_sampled_bounds_hold(oracle):
    rng = random.Random(2024)
    for n in (7, 8):
        for _ in range(100):
            net, params, alpha = sample_instance(oracle, rng, n)
            out = proof_deviation_oracle(oracle, net, alpha, **params)
            assert out.bound_holds, (net, params, out.checks)
            if oracle != "L4":
                assert out.improving


def test_outcomes_are_deterministic():
    rng = random.Random(9)
    net, params, alpha = sample_instance("L5", rng, 8)
    a = proof_deviation_oracle("L5", net, alpha, **params).as_dict()
    b = proof_deviation_oracle("L5", net, alpha, **params).as_dict()
    assert a == b


def test_finders():
    assert find_triangle(path(4)) is None
    assert find_triangle(cycle(3)) == (0, 1, 2)
    assert find_induced_square(cycle(4)) == (0, 1, 2, 3)
    k4 = build_network(4, [(a, b) for a in range(4) for b in range(a + 1, 4)])
    assert find_induced_square(k4) is None
