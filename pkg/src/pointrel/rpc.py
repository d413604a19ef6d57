"""Line-delimited JSON-RPC over stdio.

One request per line: {"id": n, "method": name, "params": {...}};
one response per line: {"id": n, "result": ...} or
{"id": n, "error": {"name": ..., "message": ...}}.  Floats cross the
boundary through repr-based JSON serialization, which round-trips
float64 exactly, so callers see bit-identical values.

Handles index validated schemas held in process memory; they stay
valid for the server's lifetime.
"""
from __future__ import annotations

import json
import sys

import numpy as np

from . import logic, metrics
from .errors import PointrelError, DomainError
from .inference import aggregate_llm_answers, convert, soft_distribution
from .schema import RelationSchema, compile_schema, load_schema, resolve_schema


class RpcServer:
    def __init__(self):
        self._handles = {}
        self._next = 1

    def _schema(self, params) -> RelationSchema:
        handle = params.get("handle")
        if handle not in self._handles:
            raise DomainError(f"unknown handle {handle!r}")
        return self._handles[handle]

    def _do_create_handle(self, params):
        if "text" in params:
            s = load_schema(params["text"])
        else:
            s = resolve_schema(params["schema"])
        compile_schema(s)
        handle = self._next
        self._next += 1
        self._handles[handle] = s
        return {
            "handle": handle,
            "schema": s.name,
            "relations": list(s.relation_names),
            "vague": s.vague_name,
        }

    def _do_soft_distribution(self, params):
        s = self._schema(params)
        probs = params["probs"]
        dist = soft_distribution(probs, s, params.get("semantics", "product"))
        compiled = compile_schema(s)
        jacobian = {}
        pv = np.asarray(probs, dtype=float)
        for name, expr in compiled.items():
            _, grad = logic.grad_soft(expr, pv)
            jacobian[name] = [float(g) for g in grad]
        return {
            "semantics": dist.semantics,
            "values": {k: float(v) for k, v in dist.values.items()},
            "jacobian": jacobian,
        }

    def _do_convert(self, params):
        s = self._schema(params)
        answers = params["answers"]
        if len(answers) != logic.NUM_ATOMS or any(a not in (True, False, 0, 1) for a in answers):
            raise DomainError("answers must be 8 booleans")
        result = convert([1.0 if a else 0.0 for a in answers], s)
        return {
            "relation": result.relation,
            "ambiguous": result.ambiguous,
            "satisfied": list(result.satisfied),
        }

    def _do_aggregate(self, params):
        return {
            "relation": aggregate_llm_answers(tuple(params["start"]), tuple(params["end"]))
        }

    def _do_metrics(self, params):
        s = self._schema(params)
        report = metrics.evaluate(params["gold"], params["pred"], s)
        return report.to_dict()

    def _do_ping(self, params):
        return {"ok": True}

    def handle(self, request: dict) -> dict:
        rid = request.get("id")
        method = request.get("method", "")
        handler = getattr(self, "_do_" + str(method), None)
        if handler is None:
            return {
                "id": rid,
                "error": {"name": "UnknownMethod", "message": f"no method {method!r}"},
            }
        try:
            return {"id": rid, "result": handler(request.get("params", {}))}
        except PointrelError as exc:
            return {
                "id": rid,
                "error": {"name": type(exc).__name__, "message": str(exc)},
            }
        except (KeyError, TypeError, ValueError, OSError) as exc:
            return {
                "id": rid,
                "error": {"name": "BadRequest", "message": f"{type(exc).__name__}: {exc}"},
            }


def run_stdio(stdin=None, stdout=None):
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    server = RpcServer()
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            response = {"id": None, "error": {"name": "ParseError", "message": exc.msg}}
        else:
            if request.get("method") == "shutdown":
                stdout.write(json.dumps({"id": request.get("id"), "result": {"ok": True}}) + "\n")
                stdout.flush()
                return
            response = server.handle(request)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()
