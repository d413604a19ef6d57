"""Boolean expressions over the eight order questions, hard and soft.

Atoms are the questions q1/q2 of the four point pairs, eight in total,
indexed in the fixed order

    (ss,1) (ss,2) (ee,1) (ee,2) (se,1) (se,2) (es,1) (es,2)

which is also the layout of every 8-float question vector exchanged in
files and over the bindings boundary.

Two evaluation semantics are provided:

* soft: conjunction is the product, disjunction a|b = a + b - a*b,
  negation 1 - a.  This is the default, is differentiable, and is the
  semantics used for training.  n-ary forms are the associative closure:
  and(xs) = prod(xs), or(xs) = 1 - prod(1 - x).
* prob_sum: the exact probability of the expression under independent
  Bernoulli atoms, computed by summing minterm probabilities.  Unlike
  soft it yields a normalized distribution over any exclusive and
  exhaustive set of expressions.

Both coincide with hard boolean evaluation on 0/1 inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import ParseError
from .points import PointConfiguration, PointPair, PointRelation, PAIR_ORDER, relation_to_answers


@dataclass(frozen=True)
class Atom:
    pair: PointPair
    index: int  # 1 or 2

    def __post_init__(self):
        if self.index not in (1, 2):
            raise ValueError(f"question index must be 1 or 2, got {self.index}")

    def __repr__(self):
        return f"Q{self.index}_{self.pair.value}"


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    child: "Expr"


@dataclass(frozen=True)
class And:
    children: tuple["Expr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And requires at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple["Expr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or requires at least two children")


Expr = Union[Atom, Const, Not, And, Or]

ATOM_ORDER: tuple[Atom, ...] = tuple(
    Atom(pair, i) for pair in PAIR_ORDER for i in (1, 2)
)
ATOM_INDEX: dict[Atom, int] = {a: i for i, a in enumerate(ATOM_ORDER)}
NUM_ATOMS = len(ATOM_ORDER)  # 8
NUM_ASSIGNMENTS = 1 << NUM_ATOMS  # 256


def and_(*parts: Expr) -> Expr:
    """N-ary conjunction; flattens nested Ands (associative in both semantics)."""
    flat: list[Expr] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.children)
        else:
            flat.append(p)
    if not flat:
        return Const(True)
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def or_(*parts: Expr) -> Expr:
    """N-ary disjunction; flattens nested Ors."""
    flat: list[Expr] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.children)
        else:
            flat.append(p)
    if not flat:
        return Const(False)
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def not_(part: Expr) -> Expr:
    return Not(part)


def atoms_of(e: Expr) -> set[Atom]:
    if isinstance(e, Atom):
        return {e}
    if isinstance(e, Const):
        return set()
    if isinstance(e, Not):
        return atoms_of(e.child)
    out: set[Atom] = set()
    for c in e.children:
        out |= atoms_of(c)
    return out


# ---------------------------------------------------------------------------
# Question vectors
# ---------------------------------------------------------------------------

def config_to_qvector(c: PointConfiguration) -> np.ndarray:
    """Binary 8-vector encoding of a configuration, in atom order."""
    vals = []
    for pair in PAIR_ORDER:
        a = relation_to_answers(c.rel(pair))
        vals.extend([1.0 if a.q1 else 0.0, 1.0 if a.q2 else 0.0])
    return np.array(vals)


def assignment_to_qvector(m: int) -> np.ndarray:
    """Binary 8-vector for assignment index m; bit i is atom i."""
    return np.array([(m >> i) & 1 for i in range(NUM_ATOMS)], dtype=float)


def qvector_to_assignment(q) -> int:
    q = np.asarray(q)
    return int(sum(1 << i for i in range(NUM_ATOMS) if q[i] > 0.5))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_hard(e: Expr, q) -> bool:
    """Standard boolean evaluation; q holds 0/1 (or bool) per atom."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Atom):
        return bool(q[ATOM_INDEX[e]] > 0.5)
    if isinstance(e, Not):
        return not eval_hard(e.child, q)
    if isinstance(e, And):
        return all(eval_hard(c, q) for c in e.children)
    return any(eval_hard(c, q) for c in e.children)


def eval_soft(e: Expr, q) -> float:
    """Soft-logic value in [0, 1]; q holds atom probabilities.

    Accepts a flat 8-vector or a batch of shape (..., 8); the result has
    the batch shape.
    """
    q = np.asarray(q, dtype=float)
    val = _soft_value(e, q)
    if val.shape == ():
        return float(val)
    return val


def _soft_value(e: Expr, q: np.ndarray) -> np.ndarray:
    batch = q.shape[:-1]
    if isinstance(e, Const):
        return np.full(batch, 1.0 if e.value else 0.0)
    if isinstance(e, Atom):
        return q[..., ATOM_INDEX[e]]
    if isinstance(e, Not):
        return 1.0 - _soft_value(e.child, q)
    if isinstance(e, And):
        out = np.ones(batch)
        for c in e.children:
            out = out * _soft_value(c, q)
        return out
    out = np.ones(batch)
    for c in e.children:
        out = out * (1.0 - _soft_value(c, q))
    return 1.0 - out


def grad_soft(e: Expr, q):
    """Soft value and its exact gradient w.r.t. the 8 atom probabilities.

    One post-order traversal; products of sibling values are combined via
    prefix/suffix accumulation so zero-valued children stay safe.  For a
    batch input of shape (n, 8) the gradient has shape (n, 8).
    """
    q = np.asarray(q, dtype=float)
    val, grad = _soft_value_grad(e, q)
    if q.ndim == 1:
        return float(val), grad
    return val, grad


def _soft_value_grad(e: Expr, q: np.ndarray):
    batch = q.shape[:-1]
    if isinstance(e, Const):
        return np.full(batch, 1.0 if e.value else 0.0), np.zeros(batch + (NUM_ATOMS,))
    if isinstance(e, Atom):
        grad = np.zeros(batch + (NUM_ATOMS,))
        grad[..., ATOM_INDEX[e]] = 1.0
        return q[..., ATOM_INDEX[e]], grad
    if isinstance(e, Not):
        v, g = _soft_value_grad(e.child, q)
        return 1.0 - v, -g
    # And: value = prod(v_i), d/dv_i = prod_{j != i} v_j
    # Or:  value = 1 - prod(1 - v_i), d/dv_i = prod_{j != i} (1 - v_j)
    vals, grads = zip(*(_soft_value_grad(c, q) for c in e.children))
    factors = vals if isinstance(e, And) else tuple(1.0 - v for v in vals)
    n = len(factors)
    prefix = [np.ones(batch)]
    for f in factors[:-1]:
        prefix.append(prefix[-1] * f)
    suffix = [np.ones(batch)]
    for f in reversed(factors[1:]):
        suffix.append(suffix[-1] * f)
    suffix.reverse()
    total = prefix[-1] * factors[-1]
    grad = np.zeros(batch + (NUM_ATOMS,))
    for i in range(n):
        # For Or the sign flips of 1-prod(...) and of the factor (1 - v_i)
        # cancel, so the accumulation is the same as for And.
        grad += (prefix[i] * suffix[i])[..., None] * grads[i]
    if isinstance(e, And):
        return total, grad
    return 1.0 - total, grad


@lru_cache(maxsize=None)
def _all_assignments() -> np.ndarray:
    return np.array(
        [[(m >> i) & 1 for i in range(NUM_ATOMS)] for m in range(NUM_ASSIGNMENTS)],
        dtype=float,
    )


def expand_minterms(e: Expr) -> frozenset[int]:
    """Indices of all full assignments under which the expression is true."""
    table = _all_assignments()
    return frozenset(m for m in range(NUM_ASSIGNMENTS) if eval_hard(e, table[m]))


def eval_prob_sum(e: Expr, q) -> float:
    """Exact satisfaction probability under independent Bernoulli atoms."""
    q = np.asarray(q, dtype=float)
    table = _all_assignments()
    total = 0.0
    for m in expand_minterms(e):
        bits = table[m]
        total += float(np.prod(np.where(bits > 0.5, q, 1.0 - q)))
    return total


# ---------------------------------------------------------------------------
# Text syntax: atoms Q1_ss .. Q2_es, operators ! & |, parentheses, true/false
# ---------------------------------------------------------------------------

_PAIR_BY_NAME = {p.value: p for p in PointPair}


class _Tokens:
    def __init__(self, text: str, line: int = 1):
        self.text = text
        self.line = line
        self.pos = 0
        self.toks: list[tuple[str, str, int]] = []  # (kind, value, column)
        self._scan()
        self.i = 0

    def _scan(self):
        t, n = self.text, len(self.text)
        i = 0
        while i < n:
            ch = t[i]
            if ch in " \t":
                i += 1
                continue
            col = i + 1
            if ch in "()!&|":
                self.toks.append((ch, ch, col))
                i += 1
                continue
            if ch.isalnum() or ch == "_":
                j = i
                while j < n and (t[j].isalnum() or t[j] == "_"):
                    j += 1
                self.toks.append(("word", t[i:j], col))
                i = j
                continue
            raise ParseError(f"unexpected character {ch!r}", self.line, col)
        self.toks.append(("end", "", n + 1))

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok


def _parse_atom_word(word: str, line: int, col: int) -> Expr:
    if word == "true":
        return Const(True)
    if word == "false":
        return Const(False)
    if len(word) == 5 and word[0] == "Q" and word[1] in "12" and word[2] == "_":
        pair = _PAIR_BY_NAME.get(word[3:])
        if pair is not None:
            return Atom(pair, int(word[1]))
    raise ParseError(f"unknown atom {word!r}", line, col)


def parse_expr(text: str, line: int = 1) -> Expr:
    """Parse the question-level expression syntax.

    Precedence: ! binds tighter than &, which binds tighter than |.
    """
    toks = _Tokens(text, line)
    e = _parse_or(toks)
    kind, val, col = toks.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing {val!r}", line, col)
    return e


def _parse_or(toks: _Tokens) -> Expr:
    parts = [_parse_and(toks)]
    while toks.peek()[0] == "|":
        toks.next()
        parts.append(_parse_and(toks))
    return or_(*parts)


def _parse_and(toks: _Tokens) -> Expr:
    parts = [_parse_unary(toks)]
    while toks.peek()[0] == "&":
        toks.next()
        parts.append(_parse_unary(toks))
    return and_(*parts)


def _parse_unary(toks: _Tokens) -> Expr:
    kind, val, col = toks.next()
    if kind == "!":
        return Not(_parse_unary(toks))
    if kind == "(":
        inner = _parse_or(toks)
        kind2, val2, col2 = toks.next()
        if kind2 != ")":
            raise ParseError("expected ')'", toks.line, col2)
        return inner
    if kind == "word":
        return _parse_atom_word(val, toks.line, col)
    raise ParseError(f"unexpected token {val or kind!r}", toks.line, col)


def to_text(e: Expr) -> str:
    """Serialize an expression in the parseable syntax (minimal parentheses)."""
    return _to_text(e, 0)


def _to_text(e: Expr, parent_prec: int) -> str:
    # precedence levels: Or=1, And=2, Not=3, atoms/consts=4
    if isinstance(e, Const):
        return "true" if e.value else "false"
    if isinstance(e, Atom):
        return f"Q{e.index}_{e.pair.value}"
    if isinstance(e, Not):
        return "!" + _to_text(e.child, 3)
    if isinstance(e, And):
        s = " & ".join(_to_text(c, 2) for c in e.children)
        return f"({s})" if parent_prec > 2 else s
    s = " | ".join(_to_text(c, 1) for c in e.children)
    return f"({s})" if parent_prec > 1 else s
