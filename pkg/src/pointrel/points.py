"""Point-level vocabulary for temporal relations between two events.

An event pair is modelled through the four start/end time points
(t1s, t1e, t2s, t2e).  Cross-event order information lives in four point
pairs: SS=(t1s,t2s), EE=(t1e,t2e), SE=(t1s,t2e), ES=(t1e,t2s).  Each pair
carries one of four relations: before, after, equal, or vague ("both
orders possible").  Every relation between two point instants is decided
by two yes/no questions:

    q1: is it possible that the first point occurs earlier?
    q2: is it possible that the second point occurs earlier?

(yes,no) -> before, (no,yes) -> after, (no,no) -> equal, (yes,yes) -> vague.

Events are proper intervals: start strictly precedes end.  Instantaneous
events are rejected, because the mutual-exclusivity guarantees of the
interval relations break down for zero-duration events.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import product

from .errors import ImproperInterval


class PointRelation(Enum):
    BEFORE = "before"
    AFTER = "after"
    EQUAL = "equal"
    VAGUE = "vague"

    def __repr__(self):
        return f"PointRelation.{self.name}"


class PointPair(Enum):
    SS = "ss"
    EE = "ee"
    SE = "se"
    ES = "es"

    def __repr__(self):
        return f"PointPair.{self.name}"


PAIR_ORDER = (PointPair.SS, PointPair.EE, PointPair.SE, PointPair.ES)
RELATION_ORDER = (
    PointRelation.BEFORE,
    PointRelation.AFTER,
    PointRelation.EQUAL,
    PointRelation.VAGUE,
)


@dataclass(frozen=True)
class QuestionAnswers:
    """Binary answers to the two order questions for one point pair."""

    q1: bool
    q2: bool


@dataclass(frozen=True)
class QuestionProbabilities:
    """Probabilistic answers; both values must lie in [0, 1]."""

    p1: float
    p2: float

    def __post_init__(self):
        if not (0.0 <= self.p1 <= 1.0 and 0.0 <= self.p2 <= 1.0):
            raise ValueError(f"probabilities out of [0,1]: ({self.p1}, {self.p2})")


@dataclass(frozen=True)
class PointConfiguration:
    """A total assignment of a PointRelation to each of the four pairs.

    A configuration need not be realizable by actual intervals; use
    :func:`is_consistent` to check.
    """

    ss: PointRelation
    ee: PointRelation
    se: PointRelation
    es: PointRelation

    def rel(self, pair: PointPair) -> PointRelation:
        return getattr(self, pair.value)

    def as_tuple(self) -> tuple[PointRelation, ...]:
        return (self.ss, self.ee, self.se, self.es)


_ANSWERS_TO_RELATION = {
    (True, False): PointRelation.BEFORE,
    (False, True): PointRelation.AFTER,
    (False, False): PointRelation.EQUAL,
    (True, True): PointRelation.VAGUE,
}
_RELATION_TO_ANSWERS = {z: q for q, z in _ANSWERS_TO_RELATION.items()}


def answers_to_relation(a: QuestionAnswers) -> PointRelation:
    """Decode the two yes/no answers into a point relation."""
    return _ANSWERS_TO_RELATION[(bool(a.q1), bool(a.q2))]


def relation_to_answers(z: PointRelation) -> QuestionAnswers:
    """Inverse of :func:`answers_to_relation`; the encoding is a bijection."""
    q1, q2 = _RELATION_TO_ANSWERS[z]
    return QuestionAnswers(q1, q2)


def invert(z: PointRelation) -> PointRelation:
    """Relation seen from the other side: before <-> after, others fixed."""
    if z is PointRelation.BEFORE:
        return PointRelation.AFTER
    if z is PointRelation.AFTER:
        return PointRelation.BEFORE
    return z


def swap_events(c: PointConfiguration) -> PointConfiguration:
    """Configuration of the pair with event 1 and event 2 exchanged.

    SS and EE invert in place; SE and ES exchange roles (the new
    start-vs-end pair relates the points of the old end-vs-start pair,
    seen from the other side).
    """
    return PointConfiguration(
        ss=invert(c.ss),
        ee=invert(c.ee),
        se=invert(c.es),
        es=invert(c.se),
    )


def configuration_from_intervals(s1, e1, s2, e2) -> PointConfiguration:
    """Configuration realized by two concrete proper intervals.

    Accepts any totally ordered numeric time values (int, float,
    Fraction).  Never produces vague: concrete instants always have a
    definite order.
    """
    if not s1 < e1:
        raise ImproperInterval(f"event 1 has start {s1!r} >= end {e1!r}")
    if not s2 < e2:
        raise ImproperInterval(f"event 2 has start {s2!r} >= end {e2!r}")

    def cmp(a, b):
        if a < b:
            return PointRelation.BEFORE
        if a > b:
            return PointRelation.AFTER
        return PointRelation.EQUAL

    return PointConfiguration(
        ss=cmp(s1, s2), ee=cmp(e1, e2), se=cmp(s1, e2), es=cmp(e1, s2)
    )


# The four points in canonical index order (t1s, t1e, t2s, t2e) and the
# index pairs realizing SS, EE, SE, ES.
_POINT_PAIRS = ((0, 2), (1, 3), (0, 3), (1, 2))


@lru_cache(maxsize=1)
def _weak_orderings() -> tuple[tuple[int, ...], ...]:
    """All weak orderings (rank vectors, ties allowed) of the four points.

    Rank vectors are canonicalized so the used ranks are 0..k-1; there are
    75 of them (the ordered Bell number for n=4).
    """
    seen = set()
    for r in product(range(4), repeat=4):
        used = sorted(set(r))
        seen.add(tuple(used.index(x) for x in r))
    return tuple(sorted(seen))


def _pair_holds(z: PointRelation, a: int, b: int) -> bool:
    if z is PointRelation.BEFORE:
        return a < b
    if z is PointRelation.AFTER:
        return a > b
    if z is PointRelation.EQUAL:
        return a == b
    return True  # vague: unconstrained


def _satisfying_orderings(c: PointConfiguration) -> list[tuple[int, ...]]:
    out = []
    for order in _weak_orderings():
        if not (order[0] < order[1] and order[2] < order[3]):
            continue  # improper intervals are excluded from the domain
        if all(
            _pair_holds(z, order[i], order[j])
            for z, (i, j) in zip(c.as_tuple(), _POINT_PAIRS)
        ):
            out.append(order)
    return out


def is_consistent(c: PointConfiguration, mode: str = "satisfiable") -> bool:
    """Whether the configuration is realizable by proper intervals.

    mode="satisfiable": some weak ordering of the four points (with
    t1s < t1e and t2s < t2e) satisfies every non-vague pair relation;
    vague pairs are unconstrained.

    mode="realizable_vague": additionally, every vague pair must be
    genuinely undetermined, i.e. among the satisfying orderings both
    strict orders of that pair occur.
    """
    if mode not in ("satisfiable", "realizable_vague"):
        raise ValueError(f"unknown consistency mode {mode!r}")
    sat = _satisfying_orderings(c)
    if not sat:
        return False
    if mode == "satisfiable":
        return True
    for z, (i, j) in zip(c.as_tuple(), _POINT_PAIRS):
        if z is PointRelation.VAGUE:
            if not any(o[i] < o[j] for o in sat) or not any(o[i] > o[j] for o in sat):
                return False
    return True


@lru_cache(maxsize=None)
def enumerate_consistent_configurations(
    mode: str = "satisfiable",
) -> tuple[PointConfiguration, ...]:
    """All consistent configurations, in a fixed canonical order.

    The order iterates (ss, ee, se, es) with each component running
    through before, after, equal, vague.
    """
    out = []
    for ss, ee, se, es in product(RELATION_ORDER, repeat=4):
        c = PointConfiguration(ss, ee, se, es)
        if is_consistent(c, mode):
            out.append(c)
    return tuple(out)
