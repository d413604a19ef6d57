"""Vague-excluded micro-F1, macro-F1, error split, confusion, reports."""
import json

import pytest
from hypothesis import given, strategies as st

from pointrel.errors import LengthMismatch
from pointrel.metrics import (
    confusion_matrix,
    error_breakdown,
    evaluate,
    macro_f1,
    micro_f1_excluding_vague,
    per_relation_f1,
)
from pointrel.schema import get_builtin

MT = get_builtin("matres")
LABELS = list(MT.relation_names)

label_lists = st.lists(st.sampled_from(LABELS), min_size=1, max_size=30)


def paired_labels():
    return label_lists.flatmap(
        lambda g: st.tuples(
            st.just(g),
            st.lists(st.sampled_from(LABELS), min_size=len(g), max_size=len(g)),
        )
    )


class TestMicroF1:
    def test_hand_counted_example(self):
        gold = ["Before", "Before", "After", "Vague"]
        pred = ["Before", "After", "After", "Before"]
        p, r, f = micro_f1_excluding_vague(gold, pred)
        assert p == pytest.approx(0.5)
        assert r == pytest.approx(2 / 3)
        assert f == pytest.approx(4 / 7)

    def test_all_vague_predictions_score_zero(self):
        gold = ["Before", "After"]
        assert micro_f1_excluding_vague(gold, ["Vague", "Vague"]) == (0.0, 0.0, 0.0)

    def test_perfect_non_vague_predictions_score_one(self):
        gold = ["Before", "After", "Equal"]
        assert micro_f1_excluding_vague(gold, list(gold)) == (1.0, 1.0, 1.0)

    def test_vague_only_dataset_scores_zero(self):
        assert micro_f1_excluding_vague(["Vague"], ["Vague"]) == (0.0, 0.0, 0.0)

    def test_correct_vague_predictions_do_not_count(self):
        # the vague hits neither help precision nor recall
        gold = ["Vague", "Vague", "Before"]
        pred = ["Vague", "Vague", "Before"]
        assert micro_f1_excluding_vague(gold, pred) == (1.0, 1.0, 1.0)

    def test_custom_vague_name(self):
        gold = ["X", "Rest"]
        pred = ["X", "X"]
        p, r, f = micro_f1_excluding_vague(gold, pred, vague_name="Rest")
        assert (p, r) == (0.5, 1.0)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            micro_f1_excluding_vague(["Before"], ["Before", "After"])

    @given(paired_labels())
    def test_permutation_invariance(self, gp):
        gold, pred = gp
        base = micro_f1_excluding_vague(gold, pred)
        k = len(gold) // 2
        rot_g = gold[k:] + gold[:k]
        rot_p = pred[k:] + pred[:k]
        assert micro_f1_excluding_vague(rot_g, rot_p) == pytest.approx(base)

    @given(paired_labels())
    def test_scores_stay_in_unit_interval(self, gp):
        gold, pred = gp
        p, r, f = micro_f1_excluding_vague(gold, pred)
        assert 0 <= p <= 1 and 0 <= r <= 1 and 0 <= f <= 1
        assert f <= max(p, r) + 1e-12


class TestPerRelationAndMacro:
    def test_hand_counted_macro(self):
        gold = ["Before", "Before", "After", "Vague"]
        pred = ["Before", "After", "After", "Before"]
        pb, rb, fb = per_relation_f1(gold, pred, "Before")
        assert (pb, rb, fb) == pytest.approx((0.5, 0.5, 0.5))
        pa, ra, fa = per_relation_f1(gold, pred, "After")
        assert (pa, ra, fa) == pytest.approx((0.5, 1.0, 2 / 3))
        assert macro_f1(gold, pred, ["Before", "After"]) == pytest.approx(7 / 12)

    def test_perfect_macro_is_one(self):
        gold = ["Before", "After", "Equal"]
        assert macro_f1(gold, gold, ["Before", "After", "Equal"]) == 1.0

    def test_absent_relation_contributes_zero(self):
        gold = ["Before", "Before"]
        pred = ["Before", "Before"]
        assert macro_f1(gold, pred, ["Before", "Equal"]) == pytest.approx(0.5)

    def test_empty_relation_set(self):
        assert macro_f1(["Before"], ["Before"], []) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            per_relation_f1(["Before"], [], "Before")


class TestErrorBreakdown:
    def test_hand_counted_example(self):
        gold = ["Before", "Before", "After", "Vague"]
        pred = ["Vague", "After", "After", "Before"]
        assert error_breakdown(gold, pred) == (1, 1)

    def test_perfect_predictions(self):
        gold = ["Before", "After", "Vague"]
        assert error_breakdown(gold, list(gold)) == (0, 0)

    def test_everything_collapsed_to_vague(self):
        gold = ["Before", "After", "Equal", "Vague"]
        pred = ["Vague"] * 4
        assert error_breakdown(gold, pred) == (3, 0)

    @given(paired_labels())
    def test_reconciliation(self, gp):
        # wrong-to-vague + wrong-to-other + correct = all non-vague golds
        gold, pred = gp
        tv, nv = error_breakdown(gold, pred, "Vague")
        correct = sum(1 for g, p in zip(gold, pred) if g == p != "Vague")
        gold_nv = sum(1 for g in gold if g != "Vague")
        assert tv + nv + correct == gold_nv


class TestConfusion:
    def test_counts_and_marginals(self):
        gold = ["Before", "Before", "After", "Vague"]
        pred = ["Before", "After", "After", "Before"]
        table = confusion_matrix(gold, pred, LABELS)
        assert table["Before"]["Before"] == 1
        assert table["Before"]["After"] == 1
        assert table["Vague"]["Before"] == 1
        assert sum(sum(row.values()) for row in table.values()) == len(gold)

    @given(paired_labels())
    def test_row_marginals_count_gold_labels(self, gp):
        gold, pred = gp
        table = confusion_matrix(gold, pred, LABELS)
        for name in LABELS:
            assert sum(table[name].values()) == gold.count(name)


class TestEvaluate:
    def test_report_fields_cohere(self):
        gold = ["Before", "Before", "After", "Vague"]
        pred = ["Before", "After", "After", "Before"]
        rep = evaluate(gold, pred, MT)
        assert rep.schema == "matres"
        assert rep.total == 4
        assert rep.micro_f1 == pytest.approx(4 / 7)
        assert rep.per_relation["Before"][2] == pytest.approx(0.5)
        assert rep.to_vague == 0 and rep.not_vague == 1

    def test_macro_excludes_vague_by_default(self):
        gold = ["Before", "After", "Equal"]
        rep = evaluate(gold, gold, MT)
        # Equal perfect, Before perfect, After perfect; Vague not averaged
        assert rep.macro_f1 == 1.0

    def test_to_dict_key_layout_is_stable(self):
        rep = evaluate(["Before"], ["Before"], MT)
        d = rep.to_dict()
        assert list(d) == [
            "schema", "total", "micro", "macro_f1", "per_relation",
            "confusion", "vague_errors",
        ]
        assert list(d["micro"]) == ["precision", "recall", "f1"]
        json.dumps(d)  # JSON-serializable end to end

    def test_to_table_mentions_every_relation(self):
        rep = evaluate(["Before", "Vague"], ["After", "Vague"], MT)
        table = rep.to_table()
        for name in MT.relation_names:
            assert name in table
        assert "gold\\pred" in table

    def test_trace_identity_against_micro_recall(self):
        gold = ["Before", "Before", "After", "Vague", "Equal"]
        pred = ["Before", "Vague", "After", "After", "After"]
        rep = evaluate(gold, pred, MT)
        diag = sum(
            rep.confusion[n][n] for n in MT.relation_names if n != MT.vague_name
        )
        gold_nv = sum(1 for g in gold if g != MT.vague_name)
        assert rep.micro_recall == pytest.approx(diag / gold_nv)
