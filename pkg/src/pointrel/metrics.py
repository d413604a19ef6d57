"""Evaluation metrics for relation predictions.

The headline score excludes the vague relation from both sides: a
prediction counts toward precision only when it is non-vague, and an
instance counts toward recall only when its gold label is non-vague.
All 0/0 ratios are defined as 0.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import LengthMismatch


def _check_lengths(gold, pred):
    if len(gold) != len(pred):
        raise LengthMismatch(
            f"gold has {len(gold)} labels but pred has {len(pred)}"
        )


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def micro_f1_excluding_vague(gold, pred, vague_name: str = "Vague"):
    """(precision, recall, F1) over non-vague predictions and golds."""
    _check_lengths(gold, pred)
    correct = sum(1 for g, p in zip(gold, pred) if p == g != vague_name)
    pred_nv = sum(1 for p in pred if p != vague_name)
    gold_nv = sum(1 for g in gold if g != vague_name)
    precision = correct / pred_nv if pred_nv else 0.0
    recall = correct / gold_nv if gold_nv else 0.0
    return precision, recall, _f1(precision, recall)


def per_relation_f1(gold, pred, relation: str):
    """One-vs-rest (precision, recall, F1) for a single relation."""
    _check_lengths(gold, pred)
    tp = sum(1 for g, p in zip(gold, pred) if g == p == relation)
    pred_n = sum(1 for p in pred if p == relation)
    gold_n = sum(1 for g in gold if g == relation)
    precision = tp / pred_n if pred_n else 0.0
    recall = tp / gold_n if gold_n else 0.0
    return precision, recall, _f1(precision, recall)


def macro_f1(gold, pred, relation_set) -> float:
    """Unweighted mean of one-vs-rest F1 over relation_set.

    Callers default the set to the schema's non-vague relations; a
    relation absent from both gold and pred contributes 0.
    """
    relation_set = list(relation_set)
    if not relation_set:
        return 0.0
    return sum(per_relation_f1(gold, pred, r)[2] for r in relation_set) / len(relation_set)


def error_breakdown(gold, pred, vague_name: str = "Vague"):
    """(to_vague, not_vague) counts over misclassified non-vague golds."""
    _check_lengths(gold, pred)
    to_vague = sum(1 for g, p in zip(gold, pred) if g != vague_name and p != g and p == vague_name)
    not_vague = sum(1 for g, p in zip(gold, pred) if g != vague_name and p != g and p != vague_name)
    return to_vague, not_vague


def confusion_matrix(gold, pred, names):
    """names x names count table as a nested dict, gold rows first."""
    _check_lengths(gold, pred)
    table = {g: {p: 0 for p in names} for g in names}
    for g, p in zip(gold, pred):
        table[g][p] += 1
    return table


@dataclass
class EvalReport:
    schema: str
    names: tuple
    micro_precision: float
    micro_recall: float
    micro_f1: float
    macro_f1: float
    per_relation: dict  # name -> (P, R, F1)
    confusion: dict  # gold name -> pred name -> count
    to_vague: int
    not_vague: int
    total: int

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "total": self.total,
            "micro": {
                "precision": self.micro_precision,
                "recall": self.micro_recall,
                "f1": self.micro_f1,
            },
            "macro_f1": self.macro_f1,
            "per_relation": {
                n: {"precision": p, "recall": r, "f1": f}
                for n, (p, r, f) in self.per_relation.items()
            },
            "confusion": self.confusion,
            "vague_errors": {"to_vague": self.to_vague, "not_vague": self.not_vague},
        }

    def to_table(self) -> str:
        width = max(len(n) for n in self.names) + 2
        lines = [
            f"schema: {self.schema}   instances: {self.total}",
            f"micro (vague excluded): P={self.micro_precision:.4f} "
            f"R={self.micro_recall:.4f} F1={self.micro_f1:.4f}",
            f"macro F1 (non-vague): {self.macro_f1:.4f}",
            f"errors on non-vague gold: to_vague={self.to_vague} not_vague={self.not_vague}",
            "",
            "relation".ljust(width) + "P".rjust(8) + "R".rjust(8) + "F1".rjust(8),
        ]
        for n in self.names:
            p, r, f = self.per_relation[n]
            lines.append(n.ljust(width) + f"{p:8.4f}{r:8.4f}{f:8.4f}")
        lines.append("")
        header = "gold\\pred".ljust(width) + "".join(n.rjust(width) for n in self.names)
        lines.append(header)
        for g in self.names:
            row = "".join(str(self.confusion[g][p]).rjust(width) for p in self.names)
            lines.append(g.ljust(width) + row)
        return "\n".join(lines)


def evaluate(gold, pred, schema) -> EvalReport:
    """Full report against a RelationSchema (or anything with
    relation_names and vague_name)."""
    names = tuple(schema.relation_names)
    vague = schema.vague_name
    mp, mr, mf = micro_f1_excluding_vague(gold, pred, vague)
    non_vague = [n for n in names if n != vague]
    tv, nv = error_breakdown(gold, pred, vague)
    return EvalReport(
        schema=schema.name,
        names=names,
        micro_precision=mp,
        micro_recall=mr,
        micro_f1=mf,
        macro_f1=macro_f1(gold, pred, non_vague),
        per_relation={n: per_relation_f1(gold, pred, n) for n in names},
        confusion=confusion_matrix(gold, pred, names),
        to_vague=tv,
        not_vague=nv,
        total=len(gold),
    )
