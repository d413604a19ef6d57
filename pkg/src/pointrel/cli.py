"""Command-line front end.

Every subcommand is a batch operation: read files, write files, print
a report.  Runs that produce artifacts also write a manifest
(<output>.manifest.json) recording the resolved configuration, input
hashes, and timing, so a run can be reproduced exactly.

Exit codes: 0 success, 1 domain failure (failed validation, metric
threshold, bad labels), 2 usage or IO errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import dataio, inference, llm, metrics, sorter
from .errors import ParseError, PointrelError
from .schema import parse_schema, resolve_schema, validate, BUILTIN_NAMES

ENV_PREFIX = "POINTREL_"


def _load_config_file(path):
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _resolve(key, flag_value, config, default, cast):
    """Precedence: flag > environment > config file > default."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(ENV_PREFIX + key.upper().replace("-", "_"))
    if env is not None:
        return cast(env)
    if key in config:
        return cast(config[key])
    return default


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_path, command, config, inputs, artifacts, seed, elapsed):
    manifest = {
        "command": command,
        "config": config,
        "inputs": {p: _sha256(p) for p in inputs if p and os.path.exists(p)},
        "seed": seed,
        "artifacts": artifacts,
        "elapsed_seconds": round(elapsed, 6),
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)


def _load_schema_arg(spec):
    """Builtin name or file path, parsed but not yet validated."""
    if spec in BUILTIN_NAMES:
        return resolve_schema(spec)
    with open(spec, "r", encoding="utf-8") as fh:
        return parse_schema(fh.read(), name_hint=spec)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate_schema(args):
    s = _load_schema_arg(args.schema)
    domain = args.domain or s.domain
    report = validate(s, domain)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(f"schema {report.schema!r} on domain {report.domain}: {report.summary()}")
    return 0 if report.ok else 1


def cmd_synth(args):
    start = time.monotonic()
    config = _load_config_file(args.config)
    n = _resolve("n", args.n, config, 1000, int)
    sigma = _resolve("sigma", args.sigma, config, 0.05, float)
    seed = _resolve("seed", args.seed, config, 0, int)
    dim = _resolve("dim", args.dim, config, 16, int)
    s = resolve_schema(args.schema)
    pairs = sorter.synth_generate(n, sigma, seed, s, dim=dim)
    records = [
        dataio.PairRecord(id=p.id, gold=p.gold, split="train",
                          features=p.features, gold_config=p.gold_config)
        for p in pairs
    ]
    dataio.write_pairs(args.out, records)
    _write_manifest(
        args.out, ["synth"], {"n": n, "sigma": sigma, "seed": seed, "dim": dim,
                              "schema": args.schema},
        [], [args.out], seed, time.monotonic() - start,
    )
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_augment(args):
    s = resolve_schema(args.schema)
    records = dataio.read_pairs(args.data, s)
    out = dataio.symmetry_augment(records, s)
    dataio.write_pairs(args.out, out)
    print(f"augmented {len(records)} -> {len(out)} records")
    return 0


def cmd_train(args):
    start = time.monotonic()
    config = _load_config_file(args.config)
    cfg = sorter.TrainConfig(
        lr=_resolve("lr", args.lr, config, sorter.TrainConfig.lr, float),
        epochs=_resolve("epochs", args.epochs, config, sorter.TrainConfig.epochs, int),
        batch_size=_resolve("batch", args.batch, config, sorter.TrainConfig.batch_size, int),
        tau=_resolve("tau", args.tau, config, sorter.TrainConfig.tau, float),
        seed=_resolve("seed", args.seed, config, sorter.TrainConfig.seed, int),
        epsilon=_resolve("epsilon", args.epsilon, config, sorter.TrainConfig.epsilon, float),
        hidden=_resolve("hidden", args.hidden, config, sorter.TrainConfig.hidden, int),
        loss_mode=_resolve("loss-mode", args.loss_mode, config,
                           sorter.TrainConfig.loss_mode, str),
    )
    s = resolve_schema(args.schema)
    records = [r for r in dataio.read_pairs(args.data, s) if r.split == "train"]
    if args.augment:
        records = dataio.symmetry_augment(records, s)
    params, history = sorter.train(records, s, cfg)
    sorter.save_checkpoint(args.out, params, cfg.tau)
    history_path = args.out + ".history.json"
    with open(history_path, "w", encoding="utf-8") as fh:
        json.dump([h.to_dict() for h in history], fh, indent=2)
    _write_manifest(
        args.out, ["train"],
        {**cfg.__dict__, "schema": args.schema, "augment": bool(args.augment),
         "train_size": len(records)},
        [args.data], [args.out, history_path], cfg.seed, time.monotonic() - start,
    )
    print(
        f"trained on {len(records)} records; "
        f"final loss {history[-1].loss:.4f}, train micro-F1 {history[-1].micro_f1:.4f}"
    )
    return 0


def _decode_q(q, s, mode, semantics):
    qv = np.asarray(q, dtype=float)
    if mode == "threshold":
        result = inference.convert((qv > 0.5).astype(float), s)
        return result.relation, result.ambiguous
    return inference.predict(qv, s, semantics), False


def cmd_convert(args):
    rows = dataio.read_predictions(args.input)
    s = resolve_schema(args.schema)
    out_rows = []
    for row in rows:
        if "relation" in row:
            out_rows.append({"id": row["id"], "relation": row["relation"]})
            continue
        relation, ambiguous = _decode_q(row["q"], s, args.decode, args.semantics)
        out_rows.append({"id": row["id"], "relation": relation, "ambiguous": ambiguous})
    dataio.write_predictions(args.out, out_rows)
    print(f"decoded {len(out_rows)} rows")
    return 0


def cmd_transfer(args):
    if args.label_mapping and not args.source_schema:
        print("--label-mapping requires --source-schema", file=sys.stderr)
        return 2
    target = resolve_schema(args.target_schema)
    rows = []
    if args.checkpoint:
        if not args.data:
            print("--checkpoint requires --data with features", file=sys.stderr)
            return 2
        params, tau = sorter.load_checkpoint(args.checkpoint)
        # labels in the data file are ignored here; read against the
        # schema they were produced with when given, else permissively
        src = resolve_schema(args.source_schema) if args.source_schema else target
        records = dataio.read_pairs(args.data, src)
        for r in records:
            probs = sorter.forward(r.features, params, tau)
            rows.append({"id": r.id, "q": [float(p) for p in probs]})
    else:
        rows = dataio.read_predictions(args.input)
    out_rows = []
    if args.label_mapping:
        mapping = inference.BUILTIN_MAPPINGS[args.label_mapping]
        source = resolve_schema(args.source_schema)
        for row in rows:
            if "relation" in row:
                rel = row["relation"]
            else:
                rel, _ = _decode_q(row["q"], source, args.decode, args.semantics)
            out_rows.append({"id": row["id"], "relation": inference.map_labels(rel, mapping)})
    else:
        for row in rows:
            if "relation" in row:
                print(f"row {row['id']!r} has no q vector to transfer", file=sys.stderr)
                return 2
            if args.decode == "threshold":
                rel, _ = _decode_q(row["q"], target, "threshold", args.semantics)
            else:
                rel = inference.transfer_decode(
                    np.asarray(row["q"], dtype=float), target, args.semantics
                )
            out_rows.append({"id": row["id"], "relation": rel})
    dataio.write_predictions(args.out, out_rows)
    print(f"transferred {len(out_rows)} rows to schema {target.name!r}")
    return 0


def cmd_eval(args):
    s = resolve_schema(args.schema)
    gold_records = dataio.read_pairs(args.gold, s)
    pred_rows = dataio.read_predictions(args.pred)
    gold_by_id = {r.id: r.gold for r in gold_records}
    gold, pred = [], []
    for row in pred_rows:
        if row["id"] not in gold_by_id:
            print(f"prediction id {row['id']!r} not in gold file", file=sys.stderr)
            return 2
        if "relation" in row:
            rel = row["relation"]
        else:
            rel, _ = _decode_q(row["q"], s, args.decode, args.semantics)
        gold.append(gold_by_id[row["id"]])
        pred.append(rel)
    report = metrics.evaluate(gold, pred, s)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.to_table())
    if args.min_f1 is not None and report.micro_f1 < args.min_f1:
        return 1
    return 0


def cmd_llm_run(args):
    config = _load_config_file(args.config)
    instances = _read_instances(args.input)
    script = None
    if args.transport == "mock":
        if not args.script:
            print("--transport mock requires --script", file=sys.stderr)
            return 2
        with open(args.script, "r", encoding="utf-8") as fh:
            script = json.load(fh)

    def make_transport(inst_id):
        if args.transport == "mock":
            answers = script.get(inst_id, script.get("default"))
            if answers is None:
                raise PointrelError(f"mock script has no answers for id {inst_id!r}")
            return llm.MockTransport(answers)
        endpoint = _resolve("llm-endpoint", args.endpoint, config, "", str)
        api_key = _resolve("llm-api-key", args.api_key, config, "", str)
        model = _resolve("llm-model", args.model, config, "", str)
        if not endpoint:
            raise PointrelError("no endpoint configured for http transport")
        transport = llm.HttpTransport(endpoint, api_key, model,
                                      min_delay=args.min_delay)
        if args.cache_dir:
            transport = llm.CachingTransport(transport, args.cache_dir)
        return transport

    out_rows, traces = [], {}
    for inst in instances:
        transport = make_transport(inst["id"])
        if args.mode == "unified":
            relation, trace = llm.run_unified(
                inst["text"], inst["e1"], inst["e2"], transport,
                model=args.model or "", temperature=args.temperature,
            )
            traces[inst["id"]] = trace.to_dict()
        else:
            labels = resolve_schema(args.schema).relation_names
            relation, steps = llm.run_classification(
                inst["text"], inst["e1"], inst["e2"], transport, labels,
                before_first=not args.before_last, k=args.k,
                model=args.model or "", temperature=args.temperature,
            )
            traces[inst["id"]] = steps
        out_rows.append({"id": inst["id"], "relation": relation})
    dataio.write_predictions(args.out, out_rows)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            json.dump(traces, fh, indent=2)
    print(f"ran {len(out_rows)} instances")
    return 0


def _read_instances(path):
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc.msg}", lineno) from exc
            for key in ("id", "text", "e1", "e2"):
                if key not in obj:
                    raise ParseError(f"missing field {key!r}", lineno)
            out.append(obj)
    return out


def cmd_rpc(args):
    from . import rpc

    rpc.run_stdio()
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="pointrel", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def add_common(sp, fmt=False):
        sp.add_argument("--config", help="JSON config file (flags/env take precedence)")
        if fmt:
            sp.add_argument("--format", choices=["json", "table"], default="table")

    sp = sub.add_parser("validate-schema", help="check exclusivity and exhaustiveness")
    sp.add_argument("schema", help="builtin name or schema file")
    sp.add_argument("--domain", choices=["all", "consistent"])
    add_common(sp, fmt=True)
    sp.set_defaults(func=cmd_validate_schema)

    sp = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    sp.add_argument("--schema", required=True)
    sp.add_argument("--n", type=int)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--dim", type=int)
    sp.add_argument("--out", required=True)
    add_common(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("augment", help="append event-swapped copies of train records")
    sp.add_argument("--data", required=True)
    sp.add_argument("--schema", required=True)
    sp.add_argument("--out", required=True)
    add_common(sp)
    sp.set_defaults(func=cmd_augment)

    sp = sub.add_parser("train", help="train the question head on labeled pairs")
    sp.add_argument("--data", required=True)
    sp.add_argument("--schema", required=True)
    sp.add_argument("--out", required=True, help="checkpoint path")
    sp.add_argument("--lr", type=float)
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--batch", type=int)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--hidden", type=int)
    sp.add_argument("--loss-mode", choices=["unnormalized", "normalized"])
    sp.add_argument("--augment", action="store_true")
    add_common(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("convert", help="decode question files to relations")
    sp.add_argument("--input", required=True)
    sp.add_argument("--schema", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--decode", choices=["threshold", "argmax"], default="threshold")
    sp.add_argument("--semantics", choices=list(inference.SEMANTICS), default="product")
    add_common(sp)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("transfer", help="decode against a different target schema")
    sp.add_argument("--input", help="prediction file with q vectors or relations")
    sp.add_argument("--checkpoint", help="decode model outputs instead of a q file")
    sp.add_argument("--data", help="pair file with features (with --checkpoint)")
    sp.add_argument("--target-schema", required=True)
    sp.add_argument("--source-schema")
    sp.add_argument("--label-mapping", choices=list(inference.BUILTIN_MAPPINGS))
    sp.add_argument("--decode", choices=["threshold", "argmax"], default="argmax")
    sp.add_argument("--semantics", choices=list(inference.SEMANTICS), default="product")
    sp.add_argument("--out", required=True)
    add_common(sp)
    sp.set_defaults(func=cmd_transfer)

    sp = sub.add_parser("eval", help="score predictions against gold labels")
    sp.add_argument("--pred", required=True)
    sp.add_argument("--gold", required=True)
    sp.add_argument("--schema", required=True)
    sp.add_argument("--decode", choices=["threshold", "argmax"], default="argmax")
    sp.add_argument("--semantics", choices=list(inference.SEMANTICS), default="product")
    sp.add_argument("--min-f1", type=float)
    add_common(sp, fmt=True)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("llm-run", help="prompt a chat model for relations")
    sp.add_argument("--input", required=True, help="JSONL of id/text/e1/e2")
    sp.add_argument("--out", required=True)
    sp.add_argument("--mode", choices=["unified", "classification"], default="unified")
    sp.add_argument("--schema", default="tbdense", help="labels for classification mode")
    sp.add_argument("--transport", choices=["mock", "http"], default="mock")
    sp.add_argument("--script", help="JSON answers per id for the mock transport")
    sp.add_argument("--endpoint")
    sp.add_argument("--api-key")
    sp.add_argument("--model")
    sp.add_argument("--temperature", type=float, default=0.0)
    sp.add_argument("--min-delay", type=float, default=0.0)
    sp.add_argument("--cache-dir")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--before-last", action="store_true",
                    help="classification option list with the first label last")
    sp.add_argument("--trace", help="write full prompt/response traces here")
    add_common(sp)
    sp.set_defaults(func=cmd_llm_run)

    sp = sub.add_parser("rpc", help="serve core operations over stdio JSON-RPC")
    add_common(sp)
    sp.set_defaults(func=cmd_rpc)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PointrelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
