from fractions import Fraction

import pytest

from helpers import path, star
from ncgame.game import SINGLE_MOVE, is_equilibrium, is_stable
from ncgame.graph import build_network
from ncgame.harness import (
    LEMMAS,
    OUTSIDE,
    VERIFIED,
    UnknownLemma,
    counterexample_search,
    tree_shape,
    verify_lemma,
)


def test_no_triangle_above_threshold():
    (rep,) = verify_lemma("L1", 5, [3])
    assert rep.status == VERIFIED and rep.violations == [] and rep.equilibria > 0


def test_equilibria_are_trees_at_four():
    reports = verify_lemma("T1", 4, ["13/4", 4, 20])
    assert [r.status for r in reports] == [VERIFIED] * 3
    assert all(r.equilibria > 0 and r.instances == 4096 for r in reports)


def test_centroid_orientation_at_five():
    (rep,) = verify_lemma("L9", 5, [8])
    assert rep.status == VERIFIED and rep.equilibria > 0


def test_outside_hypothesis_is_never_verified():
    (rep,) = verify_lemma("L1", 5, [1])
    assert rep.status == OUTSIDE
    assert rep.observations and rep.violations == []
    assert rep.oracle_outcomes and all(o["bound_holds"] for o in rep.oracle_outcomes)


def test_size_side_condition():
    # the directed-cycle lemma needs n >= 6 even far above its price threshold
    (rep,) = verify_lemma("L3", 5, [20])
    assert rep.status == OUTSIDE


def test_report_dict_and_order():
    reports = verify_lemma("L2", 4, [5, "1/2", 3])
    assert [r.alpha for r in reports] == [Fraction(1, 2), 3, 5]
    d = reports[0].as_dict()
    assert d["alpha"] == "1/2" and d["lemma"] == "L2" and d["route"] == "profile"


def test_unknown_lemma():
    with pytest.raises(UnknownLemma):
        verify_lemma("L6", 4, [1])


def test_lemma_hypotheses():
    assert not LEMMAS["L1"].in_hypothesis(5, Fraction(2))
    assert LEMMAS["L1"].in_hypothesis(5, Fraction(9, 4))
    assert LEMMAS["T2"].in_hypothesis(5, Fraction(2))
    assert not LEMMAS["L7"].in_hypothesis(3, Fraction(100))


def test_predicates_flag_known_structures():
    tri = build_network(3, [(0, 1), (1, 2), (2, 0)])
    assert LEMMAS["L1"].predicate(tri, Fraction(1))
    assert LEMMAS["T1"].predicate(tri, Fraction(1))
    assert not LEMMAS["T1"].predicate(star(4), Fraction(1))
    assert LEMMAS["C1"].predicate(tri, Fraction(1))


def test_centroid_orientation_predicate():
    # path rooted at its centre 2: edges away from the centre must be bought by the parent
    good = build_network(5, [(2, 1), (2, 3), (1, 0), (3, 4)])
    bad = build_network(5, [(2, 1), (2, 3), (0, 1), (3, 4)])
    lemma = LEMMAS["L9"]
    assert lemma.predicate(good, Fraction(3)) == []
    assert lemma.predicate(bad, Fraction(3))


def test_tree_shape():
    assert tree_shape(path(5)) == {"depth": 2, "diameter": 4}
    assert tree_shape(star(6)) == {"depth": 1, "diameter": 2}


class TestSearch:
    def test_tree_region_is_empty(self):
        assert counterexample_search(4, 10, 100).candidates == []

    def test_zero_budget(self):
        assert counterexample_search(6, 1, 0).candidates == []

    def test_low_price_finds_cycles(self):
        res = counterexample_search(8, "1/2", 100, seed=1)
        assert res.candidates
        for net, _, _ in res.candidates:
            assert not net.is_tree and is_stable(net, "1/2", SINGLE_MOVE)

    def test_seed_reproducible(self):
        a = counterexample_search(6, 2, 40, seed=5).as_dict()
        b = counterexample_search(6, 2, 40, seed=5).as_dict()
        assert a == b and a["seed"] == 5

    def test_candidates_can_be_certified_exactly(self):
        res = counterexample_search(5, 1, 50, seed=2)
        for net, _, _ in res.candidates:
            assert is_equilibrium(net, 1).verdict in ("stable", "unstable")

    def test_negative_budget(self):
        with pytest.raises(ValueError):
            counterexample_search(5, 1, -1)
