"""Relation schemas: named relation sets defined over point relations.

A schema lists mutually exclusive relations, each defined by a boolean
expression whose atoms constrain one point pair to a subset of
{before, after, equal, vague}.  Compilation replaces every point
predicate by an equivalent expression over the two order questions of
that pair, using the question encoding

    before = q1 & !q2    after = !q1 & q2
    equal  = !q1 & !q2   vague = q1 & q2

Multi-relation subsets compile to their minimal two-variable form, e.g.
{before, equal} ("<=") becomes !q2 and {after, equal} (">=") becomes !q1.
The final "vague" member of a schema is either an explicit expression or
the complement of the union of all other relations.

Built-in schemas (allen13, tbdense, matres) ship as data files in the
package's ``schemas/`` directory, written in the same text format that
:func:`load_schema` accepts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from . import logic
from .errors import (
    DuplicateRelationName,
    EmptySchema,
    ParseError,
    ValidationError,
)
from .logic import Atom, Const, Expr, and_, not_, or_
from .points import (
    PointConfiguration,
    PointPair,
    PointRelation,
    enumerate_consistent_configurations,
)

B, A, E, V = (
    PointRelation.BEFORE,
    PointRelation.AFTER,
    PointRelation.EQUAL,
    PointRelation.VAGUE,
)


@dataclass(frozen=True)
class PointPredicate:
    """Constrains one point pair's relation to a nonempty subset."""

    pair: PointPair
    allowed: frozenset[PointRelation]

    def __post_init__(self):
        if not self.allowed:
            raise ValueError("allowed set must be nonempty")


@dataclass(frozen=True)
class RelationDef:
    name: str
    expr: object  # expression tree whose leaves are PointPredicate


@dataclass
class RelationSchema:
    name: str
    relations: tuple[RelationDef, ...]
    vague_name: str = "Vague"
    vague_expr: object = None  # None means complement-of-union
    domain: str = "consistent"  # validation domain declared by the schema
    _compiled: dict = field(default=None, repr=False, compare=False)

    @property
    def relation_names(self) -> tuple[str, ...]:
        """All labels, declaration order, vague last."""
        return tuple(r.name for r in self.relations) + (self.vague_name,)


# Minimal question-level form for each of the 15 nonempty subsets.  Keys
# are frozensets of point relations; builders take the pair's two atoms.
_SUBSET_FORMS = {
    frozenset({B}): lambda q1, q2: and_(q1, not_(q2)),
    frozenset({A}): lambda q1, q2: and_(not_(q1), q2),
    frozenset({E}): lambda q1, q2: and_(not_(q1), not_(q2)),
    frozenset({V}): lambda q1, q2: and_(q1, q2),
    frozenset({B, E}): lambda q1, q2: not_(q2),
    frozenset({A, E}): lambda q1, q2: not_(q1),
    frozenset({B, V}): lambda q1, q2: q1,
    frozenset({A, V}): lambda q1, q2: q2,
    frozenset({B, A}): lambda q1, q2: or_(and_(q1, not_(q2)), and_(not_(q1), q2)),
    frozenset({E, V}): lambda q1, q2: or_(and_(not_(q1), not_(q2)), and_(q1, q2)),
    frozenset({B, A, E}): lambda q1, q2: not_(and_(q1, q2)),
    frozenset({B, A, V}): lambda q1, q2: or_(q1, q2),
    frozenset({B, E, V}): lambda q1, q2: or_(q1, not_(q2)),
    frozenset({A, E, V}): lambda q1, q2: or_(not_(q1), q2),
    frozenset({B, A, E, V}): lambda q1, q2: Const(True),
}


def predicate_to_expr(p: PointPredicate) -> Expr:
    """Question-level expression equivalent to the point predicate."""
    q1, q2 = Atom(p.pair, 1), Atom(p.pair, 2)
    return _SUBSET_FORMS[p.allowed](q1, q2)


def _compile_node(node) -> Expr:
    if isinstance(node, PointPredicate):
        return predicate_to_expr(node)
    if isinstance(node, Const):
        return node
    if isinstance(node, logic.Not):
        return not_(_compile_node(node.child))
    if isinstance(node, logic.And):
        return and_(*(_compile_node(c) for c in node.children))
    if isinstance(node, logic.Or):
        return or_(*(_compile_node(c) for c in node.children))
    raise TypeError(f"not a point expression node: {node!r}")


def compile_schema(s: RelationSchema) -> dict[str, Expr]:
    """Question-level expression per relation name, vague last.

    The result is cached on the schema instance; schemas are treated as
    immutable after construction.
    """
    if s._compiled is not None:
        return s._compiled
    if not s.relations:
        raise EmptySchema(f"schema {s.name!r} defines no relations")
    seen = set()
    for r in list(s.relations) + [RelationDef(s.vague_name, None)]:
        if r.name in seen:
            raise DuplicateRelationName(f"duplicate relation name {r.name!r}")
        seen.add(r.name)
    out: dict[str, Expr] = {}
    for r in s.relations:
        out[r.name] = _compile_node(r.expr)
    if s.vague_expr is None:
        out[s.vague_name] = not_(or_(*(out[r.name] for r in s.relations)))
    else:
        out[s.vague_name] = _compile_node(s.vague_expr)
    s._compiled = out
    return out


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    schema: str
    domain: str
    exclusive: bool
    exhaustive: bool
    overlap_witnesses: list  # (assignment dict, [names satisfied])
    gap_witnesses: list  # assignment dicts satisfied by no relation

    @property
    def ok(self) -> bool:
        return self.exclusive and self.exhaustive

    def summary(self) -> str:
        bits = []
        if not self.exclusive:
            w = self.overlap_witnesses[0]
            bits.append(f"{len(self.overlap_witnesses)} overlapping assignment(s), e.g. {w[1]} at {w[0]}")
        if not self.exhaustive:
            bits.append(f"{len(self.gap_witnesses)} uncovered assignment(s), e.g. {self.gap_witnesses[0]}")
        return "; ".join(bits) if bits else "exclusive and exhaustive"

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "domain": self.domain,
            "exclusive": self.exclusive,
            "exhaustive": self.exhaustive,
            "overlap_witnesses": [
                {"assignment": a, "satisfied": names} for a, names in self.overlap_witnesses
            ],
            "gap_witnesses": [{"assignment": a} for a in self.gap_witnesses],
        }


def _assignment_dict(q) -> dict[str, bool]:
    return {repr(a): bool(q[i] > 0.5) for i, a in enumerate(logic.ATOM_ORDER)}


def _domain_qvectors(domain: str):
    if domain in ("all_256", "all"):
        return [logic.assignment_to_qvector(m) for m in range(logic.NUM_ASSIGNMENTS)]
    if domain in ("consistent_only", "consistent"):
        return [
            logic.config_to_qvector(c)
            for c in enumerate_consistent_configurations("satisfiable")
        ]
    raise ValueError(f"unknown validation domain {domain!r}")


def validate(s: RelationSchema, domain: str = "consistent_only") -> ValidationReport:
    """Check mutual exclusivity and exhaustiveness over the given domain.

    Violations are reported with witness assignments, not raised.
    """
    compiled = compile_schema(s)
    overlaps, gaps = [], []
    for q in _domain_qvectors(domain):
        names = [n for n, e in compiled.items() if logic.eval_hard(e, q)]
        if len(names) > 1:
            overlaps.append((_assignment_dict(q), names))
        elif not names:
            gaps.append(_assignment_dict(q))
    return ValidationReport(
        schema=s.name,
        domain=domain,
        exclusive=not overlaps,
        exhaustive=not gaps,
        overlap_witnesses=overlaps,
        gap_witnesses=gaps,
    )


def satisfied_relations(q, s: RelationSchema) -> list[str]:
    """Names of all relations whose compiled expression holds under q."""
    compiled = compile_schema(s)
    return [n for n, e in compiled.items() if logic.eval_hard(e, q)]


def project(c: PointConfiguration, s: RelationSchema) -> str:
    """The schema relation realized by a point configuration.

    Exactly one compiled expression holds for any consistent
    configuration of a validated schema; if that uniqueness fails the
    vague relation is returned (see the converter's fallback rule).
    """
    names = satisfied_relations(logic.config_to_qvector(c), s)
    if len(names) == 1:
        return names[0]
    return s.vague_name


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_OP_TO_SUBSET = {
    "<": frozenset({B}),
    "<=": frozenset({B, E}),
    "=": frozenset({E}),
    ">": frozenset({A}),
    ">=": frozenset({A, E}),
    "~": frozenset({V}),
}
_SUBSET_TO_OP = {v: k for k, v in _OP_TO_SUBSET.items()}
_REL_BY_NAME = {z.value: z for z in PointRelation}


class _LineTokens:
    """Tokenizer for one point-expression line of a schema file."""

    def __init__(self, text: str, line: int):
        self.line = line
        self.toks: list[tuple[str, str, int]] = []
        i, n = 0, len(text)
        while i < n:
            ch = text[i]
            if ch in " \t":
                i += 1
                continue
            col = i + 1
            if ch == "#":
                break
            if ch in "()!&|{},":
                self.toks.append((ch, ch, col))
                i += 1
            elif ch in "<>=~":
                if ch in "<>" and i + 1 < n and text[i + 1] == "=":
                    self.toks.append(("op", text[i : i + 2], col))
                    i += 2
                else:
                    self.toks.append(("op", ch, col))
                    i += 1
            elif ch.isalnum() or ch == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self.toks.append(("word", text[i:j], col))
                i = j
            else:
                raise ParseError(f"unexpected character {ch!r}", line, col)
        self.toks.append(("end", "", n + 1))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, got {tok[1] or tok[0]!r}", self.line, tok[2])
        return tok


def _parse_point_expr(toks: _LineTokens):
    e = _parse_point_or(toks)
    kind, val, col = toks.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing {val!r}", toks.line, col)
    return e


def _parse_point_or(toks):
    parts = [_parse_point_and(toks)]
    while toks.peek()[0] == "|":
        toks.next()
        parts.append(_parse_point_and(toks))
    return or_(*parts)


def _parse_point_and(toks):
    parts = [_parse_point_unary(toks)]
    while toks.peek()[0] == "&":
        toks.next()
        parts.append(_parse_point_unary(toks))
    return and_(*parts)


def _parse_point_unary(toks):
    kind, val, col = toks.next()
    if kind == "!":
        return not_(_parse_point_unary(toks))
    if kind == "(":
        inner = _parse_point_or(toks)
        toks.expect(")")
        return inner
    if kind == "word":
        if val == "true":
            return Const(True)
        if val == "false":
            return Const(False)
        if val in ("ss", "ee", "se", "es"):
            return _parse_predicate(val, toks, col)
        raise ParseError(f"unknown token {val!r}", toks.line, col)
    raise ParseError(f"unexpected token {val or kind!r}", toks.line, col)


def _parse_predicate(pair_name: str, toks, col_pair: int) -> PointPredicate:
    pair = PointPair(pair_name)
    kind, val, col = toks.next()
    if kind == "op":
        return PointPredicate(pair, _OP_TO_SUBSET[val])
    if kind == "word" and val == "in":
        toks.expect("{")
        rels = set()
        while True:
            kind2, val2, col2 = toks.next()
            if kind2 != "word" or val2 not in _REL_BY_NAME:
                raise ParseError(f"expected a point relation, got {val2!r}", toks.line, col2)
            rels.add(_REL_BY_NAME[val2])
            kind3, val3, col3 = toks.next()
            if kind3 == "}":
                break
            if kind3 != ",":
                raise ParseError(f"expected ',' or '}}', got {val3!r}", toks.line, col3)
        return PointPredicate(pair, frozenset(rels))
    raise ParseError(
        f"expected a comparison after {pair_name!r}, got {val or kind!r}", toks.line, col
    )


def parse_schema(text: str, name_hint: str = "<schema>") -> RelationSchema:
    """Parse a schema from its text form without validating it."""
    name = None
    domain = "consistent"
    rels: list[RelationDef] = []
    vague: tuple[str, object] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        if head == "schema":
            name = rest.strip()
            if not name:
                raise ParseError("schema needs a name", lineno)
        elif head == "domain":
            d = rest.strip()
            if d not in ("all", "consistent"):
                raise ParseError(f"domain must be 'all' or 'consistent', got {d!r}", lineno)
            domain = d
        elif head in ("relation", "vague"):
            rel_name, sep, expr_text = rest.partition(":=")
            rel_name = rel_name.strip()
            if not sep or not rel_name:
                raise ParseError(f"expected '{head} <name> := <expr>'", lineno)
            if head == "vague":
                if expr_text.strip() == "complement":
                    vague = (rel_name, None)
                else:
                    vague = (rel_name, _parse_point_expr(_LineTokens(expr_text, lineno)))
            else:
                rels.append(
                    RelationDef(rel_name, _parse_point_expr(_LineTokens(expr_text, lineno)))
                )
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)
    if name is None:
        raise ParseError("missing 'schema <name>' header", 1)
    if not rels:
        raise EmptySchema(f"schema {name!r} defines no relations")
    if vague is None:
        vague = ("Vague", None)
    return RelationSchema(
        name=name, relations=tuple(rels), vague_name=vague[0], vague_expr=vague[1],
        domain=domain,
    )


def load_schema(text: str, name_hint: str = "<schema>") -> RelationSchema:
    """Parse and validate a schema from its text form.

    Raises ParseError for malformed text and ValidationError if the
    parsed schema is not exclusive and exhaustive on its declared
    domain (``domain all`` or ``domain consistent``; default consistent).
    """
    s = parse_schema(text, name_hint)
    report = validate(s, s.domain)
    if not report.ok:
        raise ValidationError(report)
    return s


def _point_expr_text(node, parent_prec: int = 0) -> str:
    if isinstance(node, PointPredicate):
        op = _SUBSET_TO_OP.get(node.allowed)
        if op is not None:
            return f"{node.pair.value} {op}"
        members = ", ".join(
            z.value for z in PointRelation if z in node.allowed
        )
        return f"{node.pair.value} in {{{members}}}"
    if isinstance(node, Const):
        return "true" if node.value else "false"
    if isinstance(node, logic.Not):
        return "!" + _point_expr_text(node.child, 3)
    if isinstance(node, logic.And):
        s = " & ".join(_point_expr_text(c, 2) for c in node.children)
        return f"({s})" if parent_prec > 2 else s
    s = " | ".join(_point_expr_text(c, 1) for c in node.children)
    return f"({s})" if parent_prec > 1 else s


def save_schema(s: RelationSchema) -> str:
    """Render a schema in the text format accepted by load_schema."""
    lines = [f"schema {s.name}", f"domain {s.domain}"]
    for r in s.relations:
        lines.append(f"relation {r.name} := {_point_expr_text(r.expr)}")
    if s.vague_expr is None:
        lines.append(f"vague {s.vague_name} := complement")
    else:
        lines.append(f"vague {s.vague_name} := {_point_expr_text(s.vague_expr)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Built-ins
# ---------------------------------------------------------------------------

BUILTIN_NAMES = ("allen13", "tbdense", "matres")
_builtin_cache: dict[str, RelationSchema] = {}


def get_builtin(name: str) -> RelationSchema:
    if name not in BUILTIN_NAMES:
        raise KeyError(f"no builtin schema {name!r}; choices: {BUILTIN_NAMES}")
    if name not in _builtin_cache:
        text = resources.files("pointrel.schemas").joinpath(f"{name}.schema").read_text("utf-8")
        _builtin_cache[name] = load_schema(text, name_hint=name)
    return _builtin_cache[name]


def builtin_schemas() -> dict[str, RelationSchema]:
    return {name: get_builtin(name) for name in BUILTIN_NAMES}


def resolve_schema(spec: str) -> RelationSchema:
    """A builtin name, or a path to a schema file."""
    if spec in BUILTIN_NAMES:
        return get_builtin(spec)
    with open(spec, "r", encoding="utf-8") as fh:
        return load_schema(fh.read(), name_hint=spec)
