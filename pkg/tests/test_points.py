"""Point relations, the question encoding, and consistency checking."""
import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pointrel.errors import ImproperInterval
from pointrel.points import (
    PAIR_ORDER,
    RELATION_ORDER,
    PointConfiguration,
    PointPair,
    PointRelation,
    QuestionAnswers,
    QuestionProbabilities,
    answers_to_relation,
    configuration_from_intervals,
    enumerate_consistent_configurations,
    invert,
    is_consistent,
    relation_to_answers,
    swap_events,
)

B, A, E, V = (PointRelation.BEFORE, PointRelation.AFTER,
              PointRelation.EQUAL, PointRelation.VAGUE)

relations = st.sampled_from(RELATION_ORDER)
configurations = st.builds(PointConfiguration, relations, relations, relations, relations)


class TestQuestionEncoding:
    """The two order questions encode the four point relations."""

    def test_all_four_rows(self):
        # q1 = "can the first point be earlier", q2 = "can the second"
        assert answers_to_relation(QuestionAnswers(True, False)) is B
        assert answers_to_relation(QuestionAnswers(False, True)) is A
        assert answers_to_relation(QuestionAnswers(False, False)) is E
        assert answers_to_relation(QuestionAnswers(True, True)) is V

    def test_round_trip_is_bijective(self):
        seen = set()
        for z in RELATION_ORDER:
            a = relation_to_answers(z)
            assert answers_to_relation(a) is z
            seen.add((a.q1, a.q2))
        assert len(seen) == 4

    def test_probabilities_validated(self):
        QuestionProbabilities(0.0, 1.0)
        with pytest.raises(ValueError):
            QuestionProbabilities(-0.1, 0.5)
        with pytest.raises(ValueError):
            QuestionProbabilities(0.5, 1.5)


class TestInvertAndSwap:
    def test_invert_table(self):
        assert invert(B) is A and invert(A) is B
        assert invert(E) is E and invert(V) is V

    @given(relations)
    def test_invert_is_involutive(self, z):
        assert invert(invert(z)) is z

    def test_swap_exchanges_cross_pairs(self):
        c = PointConfiguration(ss=B, ee=A, se=B, es=V)
        s = swap_events(c)
        assert s.ss is A and s.ee is B
        assert s.se is invert(c.es) and s.es is invert(c.se)

    @given(configurations)
    def test_swap_is_involutive(self, c):
        assert swap_events(swap_events(c)) == c

    @given(configurations)
    def test_swap_preserves_consistency(self, c):
        # relabeling the events cannot change realizability
        assert is_consistent(c) == is_consistent(swap_events(c))
        assert is_consistent(c, "realizable_vague") == is_consistent(
            swap_events(c), "realizable_vague"
        )


class TestIntervalOracle:
    def test_disjoint_intervals(self):
        c = configuration_from_intervals(1, 2, 3, 4)
        assert c == PointConfiguration(ss=B, ee=B, se=B, es=B)

    def test_touching_intervals(self):
        c = configuration_from_intervals(1, 2, 2, 4)
        assert c.es is E and c.ss is B

    def test_containment(self):
        c = configuration_from_intervals(0, 10, 2, 3)
        assert c == PointConfiguration(ss=B, ee=A, se=B, es=A)

    def test_identical_intervals(self):
        c = configuration_from_intervals(0, 1, 0, 1)
        assert c.ss is E and c.ee is E and c.se is B and c.es is A

    def test_improper_interval_rejected(self):
        with pytest.raises(ImproperInterval):
            configuration_from_intervals(2, 2, 0, 1)
        with pytest.raises(ImproperInterval):
            configuration_from_intervals(0, 1, 5, 4)

    def test_fractions_work(self):
        c = configuration_from_intervals(Fraction(1, 3), Fraction(1, 2), Fraction(1, 2), 1)
        assert c.es is E

    @given(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5))
    def test_interval_configurations_are_consistent(self, s1, d1, s2, d2):
        c = configuration_from_intervals(s1, s1 + abs(d1) + 1, s2, s2 + abs(d2) + 1)
        assert is_consistent(c)
        assert is_consistent(c, "realizable_vague")  # no vague pairs at all
        assert V not in c.as_tuple()


class TestConsistency:
    """Realizability by four points with t1s < t1e and t2s < t2e."""

    def test_satisfiable_count(self):
        assert len(enumerate_consistent_configurations("satisfiable")) == 96

    def test_realizable_vague_count(self):
        assert len(enumerate_consistent_configurations("realizable_vague")) == 29

    def test_definite_configurations_match_interval_count(self):
        # exactly the 13 interval relations have no vague pair
        definite = [
            c for c in enumerate_consistent_configurations("satisfiable")
            if V not in c.as_tuple()
        ]
        assert len(definite) == 13

    def test_realizable_subset_of_satisfiable(self):
        sat = set(enumerate_consistent_configurations("satisfiable"))
        real = set(enumerate_consistent_configurations("realizable_vague"))
        assert real <= sat

    def test_all_vague_is_consistent(self):
        assert is_consistent(PointConfiguration(V, V, V, V), "realizable_vague")

    def test_impossible_configuration(self):
        # es = before puts event 1 first, se = after puts event 2 first
        assert not is_consistent(PointConfiguration(ss=B, ee=B, se=A, es=B))

    def test_se_equal_is_impossible(self):
        # t1s = t2e would force t2e < t1e and t2s < t1s ... with every
        # other pair equal it contradicts proper intervals
        assert not is_consistent(PointConfiguration(E, E, E, E))

    def test_vague_not_realizable_when_forced(self):
        # es = before forces t1s < t2s, so a vague ss cannot be two-way
        c = PointConfiguration(ss=V, ee=V, se=B, es=B)
        assert is_consistent(c, "satisfiable")
        assert not is_consistent(c, "realizable_vague")

    @given(configurations)
    def test_mode_ordering(self, c):
        # realizable_vague is strictly stronger
        if is_consistent(c, "realizable_vague"):
            assert is_consistent(c, "satisfiable")

    def test_enumeration_agrees_with_membership(self):
        sat = set(enumerate_consistent_configurations("satisfiable"))
        for rels in itertools.product(RELATION_ORDER, repeat=4):
            c = PointConfiguration(*rels)
            assert (c in sat) == is_consistent(c)
