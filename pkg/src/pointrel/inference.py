"""Decoding question vectors into schema relations.

Three decoders share the compiled schema expressions:

* :func:`convert` takes binary answers and returns the unique satisfied
  relation, falling back to the vague relation (with an ambiguity flag)
  when uniqueness fails.
* :func:`predict` takes probabilities, scores every relation under a
  soft semantics, and returns the argmax.
* :func:`transfer_decode` is the same machinery pointed at a different
  target schema; the question layer itself carries no schema.

Also here: fixed label mappings between schemas and the aggregation of
externally produced start/end ordering answers into interval relations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import logic
from .errors import DomainError, UnknownRelation
from .points import PointConfiguration, PointRelation
from .schema import RelationSchema, compile_schema

SEMANTICS = ("product", "prob_sum")


@dataclass(frozen=True)
class RelationDistribution:
    """Scores per relation name, in schema order with vague last."""

    schema: str
    values: dict  # relation name -> float in [0,1]
    semantics: str

    def argmax(self) -> str:
        # dict order is schema order, so strict '>' breaks ties by
        # declaration order with vague last
        best_name, best_val = None, -1.0
        for name, val in self.values.items():
            if val > best_val:
                best_name, best_val = name, val
        return best_name

    def to_dict(self) -> dict:
        return {"schema": self.schema, "semantics": self.semantics, "values": dict(self.values)}


@dataclass(frozen=True)
class ConversionResult:
    relation: str
    ambiguous: bool  # true when zero or several expressions held
    satisfied: tuple  # every relation name that held


def _as_qvector(q) -> np.ndarray:
    if isinstance(q, PointConfiguration):
        return logic.config_to_qvector(q)
    arr = np.asarray(q, dtype=float)
    if arr.shape != (logic.NUM_ATOMS,):
        raise DomainError(f"expected {logic.NUM_ATOMS} question values, got shape {arr.shape}")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("question probabilities must lie in [0, 1]")
    return arr


def convert(q, s: RelationSchema) -> ConversionResult:
    """Decode a binary question vector to a relation name.

    A validated schema satisfies exactly one expression on its declared
    domain; on out-of-domain assignments several (or none) may hold, in
    which case the vague relation is returned and ``ambiguous`` is set.
    """
    qv = _as_qvector(q)
    compiled = compile_schema(s)
    names = tuple(n for n, e in compiled.items() if logic.eval_hard(e, qv))
    if len(names) == 1:
        return ConversionResult(names[0], False, names)
    return ConversionResult(s.vague_name, True, names)


def soft_distribution(p, s: RelationSchema, semantics: str = "product") -> RelationDistribution:
    """Score each relation's compiled expression at probabilities p.

    ``product`` evaluates the expression with the fuzzy operators
    (a*b, a+b-ab, 1-a); ``prob_sum`` sums exact assignment
    probabilities under independent questions and normalizes, yielding
    a proper distribution even when the expressions overlap outside
    the schema's domain.
    """
    pv = _as_qvector(p)
    compiled = compile_schema(s)
    if semantics == "product":
        values = {n: float(logic.eval_soft(e, pv)) for n, e in compiled.items()}
    elif semantics == "prob_sum":
        raw = {n: logic.eval_prob_sum(e, pv) for n, e in compiled.items()}
        total = sum(raw.values())
        values = {n: v / total for n, v in raw.items()}
    else:
        raise ValueError(f"unknown semantics {semantics!r}; choices: {SEMANTICS}")
    return RelationDistribution(schema=s.name, values=values, semantics=semantics)


def predict(p, s: RelationSchema, semantics: str = "product") -> str:
    """Soft argmax decode; ties go to schema order, vague last.

    Exactly binary inputs decode through convert instead, so that the
    ambiguity fallback applies there: on assignments satisfying
    several expressions at once every satisfied relation scores 1.0
    and a plain argmax would just pick the earliest, while the hard
    decoder's answer is the vague fallback.
    """
    pv = _as_qvector(p)
    if np.all((pv == 0.0) | (pv == 1.0)):
        return convert(pv, s).relation
    return soft_distribution(pv, s, semantics).argmax()


def transfer_decode(q, target: RelationSchema, semantics: str = "product") -> str:
    """Decode against a schema the producer of q never saw.

    Binary inputs go through convert, interior probabilities through
    predict; nothing about the source schema is consulted.
    """
    qv = _as_qvector(q)
    if np.all((qv == 0.0) | (qv == 1.0)):
        return convert(qv, target).relation
    return predict(qv, target, semantics)


# ---------------------------------------------------------------------------
# Label mappings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LabelMapping:
    name: str
    source_schema: str
    target_schema: str
    mapping: dict  # source relation name -> target relation name


# Fixed tbdense -> matres mappings used as transfer baselines.  The
# first sends both containment relations to Vague, the second to the
# start-point order they imply.
MAPPING1 = LabelMapping(
    name="mapping1",
    source_schema="tbdense",
    target_schema="matres",
    mapping={
        "Before": "Before",
        "After": "After",
        "Includes": "Vague",
        "Is_Included": "Vague",
        "Simultaneous": "Equal",
        "Vague": "Vague",
    },
)

MAPPING2 = LabelMapping(
    name="mapping2",
    source_schema="tbdense",
    target_schema="matres",
    mapping={
        "Before": "Before",
        "After": "After",
        "Includes": "Before",
        "Is_Included": "After",
        "Simultaneous": "Equal",
        "Vague": "Vague",
    },
)

BUILTIN_MAPPINGS = {"mapping1": MAPPING1, "mapping2": MAPPING2}


def map_labels(relation: str, m: LabelMapping) -> str:
    if relation not in m.mapping:
        raise UnknownRelation(f"{relation!r} is not in mapping {m.name!r}'s source set")
    return m.mapping[relation]


# ---------------------------------------------------------------------------
# Aggregation of externally answered ordering questions
# ---------------------------------------------------------------------------

ANSWER_EVENT_1 = "event_1"
ANSWER_EVENT_2 = "event_2"
ANSWER_OTHER = "other"
ANSWERS = (ANSWER_EVENT_1, ANSWER_EVENT_2, ANSWER_OTHER)

# (earlier-question answer, later-question answer) -> point relation.
# A lone usable answer decides alone; agreement on one event, or no
# usable answer, is vague.
_POINT_ROWS = {
    (ANSWER_EVENT_1, ANSWER_EVENT_2): PointRelation.BEFORE,
    (ANSWER_EVENT_1, ANSWER_OTHER): PointRelation.BEFORE,
    (ANSWER_OTHER, ANSWER_EVENT_2): PointRelation.BEFORE,
    (ANSWER_EVENT_2, ANSWER_EVENT_1): PointRelation.AFTER,
    (ANSWER_OTHER, ANSWER_EVENT_1): PointRelation.AFTER,
    (ANSWER_EVENT_2, ANSWER_OTHER): PointRelation.AFTER,
}

# (start point relation, end point relation) -> tbdense label.
_PAIR_ROWS = {
    (PointRelation.BEFORE, PointRelation.BEFORE): "Before",
    (PointRelation.AFTER, PointRelation.AFTER): "After",
    (PointRelation.BEFORE, PointRelation.AFTER): "Includes",
    (PointRelation.AFTER, PointRelation.BEFORE): "Is_Included",
}


def _check_answer(a) -> str:
    if a not in ANSWERS:
        raise ValueError(f"answer must be one of {ANSWERS}, got {a!r}")
    return a


def llm_point_relation(answers: tuple) -> PointRelation:
    """Two ordering answers about one point pair -> before/after/vague."""
    key = (_check_answer(answers[0]), _check_answer(answers[1]))
    return _POINT_ROWS.get(key, PointRelation.VAGUE)


def llm_pair_relation(start: PointRelation, end: PointRelation) -> str:
    """Start/end point relations -> interval label, vague by default."""
    return _PAIR_ROWS.get((start, end), "Vague")


def aggregate_llm_answers(start: tuple, end: tuple) -> str:
    """Four raw answers (two per point pair) -> interval label."""
    return llm_pair_relation(llm_point_relation(start), llm_point_relation(end))
