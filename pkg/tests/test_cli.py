"""End-to-end command-line behavior: exit codes, files, manifests."""
import collections
import json
import pathlib
import subprocess
import sys

import pytest

from pointrel.cli import main
from pointrel.dataio import read_pairs, read_predictions
from pointrel.schema import get_builtin

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
PAIRS = str(FIXTURES / "pairs_small.jsonl")
INCLUDES = str(FIXTURES / "includes_configs.jsonl")


def run(*argv):
    return main([str(a) for a in argv])


class TestExitCodes:
    def test_valid_schema_exits_zero(self, capsys):
        assert run("validate-schema", "tbdense") == 0
        out = capsys.readouterr().out
        assert "exclusive and exhaustive" in out

    def test_invalid_schema_exits_one(self, capsys):
        assert run("validate-schema", FIXTURES / "overlap.schema") == 1
        assert "overlapping" in capsys.readouterr().out

    def test_missing_file_exits_two(self, capsys):
        assert run("validate-schema", "no_such_file.schema") == 2
        assert "error:" in capsys.readouterr().err

    def test_usage_error_exits_two(self, tmp_path, capsys):
        code = run(
            "transfer", "--input", INCLUDES, "--target-schema", "matres",
            "--label-mapping", "mapping1", "--out", tmp_path / "o.jsonl",
        )
        assert code == 2
        assert "--source-schema" in capsys.readouterr().err

    def test_validate_json_format(self, capsys):
        assert run("validate-schema", "matres", "--format", "json") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["exclusive"] and doc["exhaustive"]

    def test_domain_override(self, capsys):
        # tbdense is only meant for the consistent domain
        assert run("validate-schema", "tbdense", "--domain", "all") == 1


class TestSynth:
    def test_writes_data_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "data.jsonl"
        assert run("synth", "--schema", "tbdense", "--n", 50, "--sigma", 0.1,
                   "--seed", 4, "--dim", 6, "--out", out) == 0
        records = read_pairs(out, get_builtin("tbdense"))
        assert len(records) == 50
        manifest = json.loads((tmp_path / "data.jsonl.manifest.json").read_text())
        assert manifest["command"] == ["synth"]
        assert manifest["config"]["n"] == 50
        assert manifest["seed"] == 4
        assert str(out) in manifest["artifacts"]

    def test_same_seed_same_bytes(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for out in (a, b):
            assert run("synth", "--schema", "tbdense", "--n", 30, "--sigma", 0.2,
                       "--seed", 9, "--dim", 5, "--out", out) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_env_overrides_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("POINTREL_N", "7")
        out = tmp_path / "d.jsonl"
        assert run("synth", "--schema", "matres", "--sigma", 0.0,
                   "--seed", 0, "--out", out) == 0
        assert len(out.read_text().splitlines()) == 7

    def test_flag_beats_env_and_config(self, tmp_path, monkeypatch):
        monkeypatch.setenv("POINTREL_N", "7")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 11}))
        out = tmp_path / "d.jsonl"
        assert run("synth", "--schema", "matres", "--n", 3, "--sigma", 0.0,
                   "--seed", 0, "--out", out, "--config", cfg) == 0
        assert len(out.read_text().splitlines()) == 3

    def test_config_file_beats_default(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 11}))
        out = tmp_path / "d.jsonl"
        assert run("synth", "--schema", "matres", "--sigma", 0.0,
                   "--seed", 0, "--out", out, "--config", cfg) == 0
        assert len(out.read_text().splitlines()) == 11


class TestAugment:
    def test_doubles_records(self, tmp_path, capsys):
        out = tmp_path / "aug.jsonl"
        assert run("augment", "--data", PAIRS, "--schema", "tbdense",
                   "--out", out) == 0
        assert "6 -> 12" in capsys.readouterr().out
        ids = [r.id for r in read_pairs(out, get_builtin("tbdense"))]
        assert len(ids) == 12 and ids[6:] == [i + "#sym" for i in ids[:6]]


class TestTrain:
    def synth(self, tmp_path, n=60):
        data = tmp_path / "train.jsonl"
        run("synth", "--schema", "tbdense", "--n", n, "--sigma", 0.05,
            "--seed", 2, "--dim", 6, "--out", data)
        return data

    def test_checkpoint_history_manifest(self, tmp_path):
        data = self.synth(tmp_path)
        ckpt = tmp_path / "model.json"
        assert run("train", "--data", data, "--schema", "tbdense", "--out", ckpt,
                   "--epochs", 2, "--seed", 1) == 0
        payload = json.loads(ckpt.read_text())
        assert payload["version"] == 1 and payload["dim"] == 6
        history = json.loads((tmp_path / "model.json.history.json").read_text())
        assert [h["epoch"] for h in history] == [0, 1]
        manifest = json.loads((tmp_path / "model.json.manifest.json").read_text())
        assert manifest["config"]["epochs"] == 2
        assert manifest["config"]["train_size"] == 60
        assert str(data) in manifest["inputs"]

    def test_same_seed_identical_checkpoints(self, tmp_path):
        data = self.synth(tmp_path)
        c1, c2 = tmp_path / "m1.json", tmp_path / "m2.json"
        for out in (c1, c2):
            assert run("train", "--data", data, "--schema", "tbdense",
                       "--out", out, "--epochs", 2, "--seed", 3) == 0
        assert c1.read_bytes() == c2.read_bytes()

    def test_augment_flag_doubles_train_size(self, tmp_path):
        data = self.synth(tmp_path, n=40)
        ckpt = tmp_path / "m.json"
        assert run("train", "--data", data, "--schema", "tbdense", "--out", ckpt,
                   "--epochs", 1, "--augment") == 0
        manifest = json.loads((tmp_path / "m.json.manifest.json").read_text())
        assert manifest["config"]["train_size"] == 80
        assert manifest["config"]["augment"] is True


class TestConvertAndTransfer:
    def test_threshold_convert_matches_projection(self, tmp_path):
        out = tmp_path / "rel.jsonl"
        assert run("convert", "--input", INCLUDES, "--schema", "tbdense",
                   "--out", out, "--decode", "threshold") == 0
        rows = read_predictions(out)
        assert len(rows) == 12
        assert all(r["relation"] == "Includes" for r in rows)
        assert not any(r["ambiguous"] for r in rows)

    def test_argmax_convert_agrees_on_binary_inputs(self, tmp_path):
        t_out = tmp_path / "t.jsonl"
        a_out = tmp_path / "a.jsonl"
        run("convert", "--input", INCLUDES, "--schema", "tbdense",
            "--out", t_out, "--decode", "threshold")
        run("convert", "--input", INCLUDES, "--schema", "tbdense",
            "--out", a_out, "--decode", "argmax")
        t_rows = {r["id"]: r["relation"] for r in read_predictions(t_out)}
        a_rows = {r["id"]: r["relation"] for r in read_predictions(a_out)}
        assert t_rows == a_rows

    def test_transfer_direct_decode(self, tmp_path):
        out = tmp_path / "matres.jsonl"
        assert run("transfer", "--input", INCLUDES, "--target-schema", "matres",
                   "--out", out) == 0
        counts = collections.Counter(r["relation"] for r in read_predictions(out))
        assert dict(counts) == {"Before": 8, "Equal": 4}

    def test_transfer_with_label_mapping(self, tmp_path):
        out = tmp_path / "mapped.jsonl"
        assert run("transfer", "--input", INCLUDES, "--target-schema", "matres",
                   "--source-schema", "tbdense", "--label-mapping", "mapping1",
                   "--out", out, "--decode", "threshold") == 0
        assert all(r["relation"] == "Vague" for r in read_predictions(out))

    def test_transfer_from_checkpoint(self, tmp_path):
        data = tmp_path / "train.jsonl"
        run("synth", "--schema", "tbdense", "--n", 40, "--sigma", 0.0,
            "--seed", 2, "--dim", 6, "--out", data)
        ckpt = tmp_path / "m.json"
        run("train", "--data", data, "--schema", "tbdense", "--out", ckpt,
            "--epochs", 1)
        out = tmp_path / "trans.jsonl"
        assert run("transfer", "--checkpoint", ckpt, "--data", data,
                   "--source-schema", "tbdense", "--target-schema", "matres",
                   "--out", out) == 0
        rows = read_predictions(out)
        assert len(rows) == 40
        assert all(r["relation"] in get_builtin("matres").relation_names for r in rows)

    def test_transfer_checkpoint_requires_data(self, tmp_path, capsys):
        code = run("transfer", "--checkpoint", "x.json",
                   "--target-schema", "matres", "--out", tmp_path / "o.jsonl")
        assert code == 2


class TestEval:
    def write_preds(self, tmp_path, preds):
        p = tmp_path / "preds.jsonl"
        p.write_text("".join(json.dumps(r) + "\n" for r in preds))
        return p

    def test_perfect_predictions(self, tmp_path, capsys):
        gold = read_pairs(PAIRS, get_builtin("tbdense"))
        preds = self.write_preds(
            tmp_path, [{"id": r.id, "relation": r.gold} for r in gold]
        )
        assert run("eval", "--pred", preds, "--gold", PAIRS,
                   "--schema", "tbdense") == 0
        out = capsys.readouterr().out
        assert "micro (vague excluded)" in out

    def test_min_f1_gate_fails(self, tmp_path):
        gold = read_pairs(PAIRS, get_builtin("tbdense"))
        preds = self.write_preds(
            tmp_path, [{"id": r.id, "relation": "Vague"} for r in gold]
        )
        assert run("eval", "--pred", preds, "--gold", PAIRS,
                   "--schema", "tbdense", "--min-f1", "0.5") == 1

    def test_json_format(self, tmp_path, capsys):
        gold = read_pairs(PAIRS, get_builtin("tbdense"))
        preds = self.write_preds(
            tmp_path, [{"id": r.id, "relation": r.gold} for r in gold]
        )
        assert run("eval", "--pred", preds, "--gold", PAIRS,
                   "--schema", "tbdense", "--format", "json") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["micro"]["f1"] == 1.0

    def test_unknown_prediction_id(self, tmp_path, capsys):
        preds = self.write_preds(tmp_path, [{"id": "ghost", "relation": "Vague"}])
        assert run("eval", "--pred", preds, "--gold", PAIRS,
                   "--schema", "tbdense") == 2


class TestLlmRun:
    def test_mock_reproduces_expected_file(self, tmp_path):
        out = tmp_path / "llm.jsonl"
        assert run("llm-run", "--input", FIXTURES / "llm_instances.jsonl",
                   "--script", FIXTURES / "llm_script.json", "--out", out) == 0
        assert out.read_bytes() == (FIXTURES / "llm_expected.jsonl").read_bytes()

    def test_trace_written(self, tmp_path):
        out = tmp_path / "llm.jsonl"
        trace = tmp_path / "trace.json"
        assert run("llm-run", "--input", FIXTURES / "llm_instances.jsonl",
                   "--script", FIXTURES / "llm_script.json", "--out", out,
                   "--trace", trace) == 0
        doc = json.loads(trace.read_text())
        assert set(doc) == {"i1", "i2", "i3", "i4"}
        assert len(doc["i1"]["steps"]) == 4
        assert doc["i1"]["relation"] == "Before"

    def test_mock_without_script_is_usage_error(self, tmp_path, capsys):
        code = run("llm-run", "--input", FIXTURES / "llm_instances.jsonl",
                   "--out", tmp_path / "o.jsonl")
        assert code == 2

    def test_missing_script_entry_is_domain_error(self, tmp_path):
        script = tmp_path / "script.json"
        script.write_text(json.dumps({"i1": ["event_1"] * 4}))
        code = run("llm-run", "--input", FIXTURES / "llm_instances.jsonl",
                   "--script", script, "--out", tmp_path / "o.jsonl")
        assert code == 1

    def test_script_default_answers(self, tmp_path):
        script = tmp_path / "script.json"
        script.write_text(json.dumps({"default": ["event_1", "event_2"] * 2}))
        out = tmp_path / "o.jsonl"
        assert run("llm-run", "--input", FIXTURES / "llm_instances.jsonl",
                   "--script", script, "--out", out) == 0
        rows = read_predictions(out)
        assert all(r["relation"] == "Before" for r in rows)

    def test_classification_mode(self, tmp_path):
        script = tmp_path / "script.json"
        script.write_text(json.dumps({"default": ["Before"]}))
        out = tmp_path / "o.jsonl"
        assert run("llm-run", "--input", FIXTURES / "llm_instances.jsonl",
                   "--script", script, "--out", out,
                   "--mode", "classification", "--schema", "tbdense") == 0
        rows = read_predictions(out)
        assert all(r["relation"] == "Before" for r in rows)


class TestRpcPipe:
    def test_ping_and_shutdown_over_stdio(self):
        lines = (
            json.dumps({"id": 1, "method": "ping"}) + "\n"
            + json.dumps({"id": 2, "method": "shutdown"}) + "\n"
        )
        proc = subprocess.run(
            [sys.executable, "-m", "pointrel.cli", "rpc"],
            input=lines, capture_output=True, text=True, timeout=60,
        )
        assert proc.returncode == 0
        replies = [json.loads(l) for l in proc.stdout.splitlines()]
        assert replies[0]["id"] == 1 and replies[0]["result"]["ok"] is True
        assert replies[1]["id"] == 2 and replies[1]["result"]["ok"] is True
