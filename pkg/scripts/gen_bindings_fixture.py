#!/usr/bin/env python3
"""Regenerate the parity fixture consumed by the frontend bindings tests.

For every built-in schema this samples seeded probability vectors and
records the core soft-distribution values verbatim.  JSON writes
floats through repr, which round-trips float64 exactly, so the
bindings can assert equality against a live server within 1e-12.
"""
import argparse
import json
import pathlib

import numpy as np

from pointrel.inference import convert, soft_distribution
from pointrel.schema import BUILTIN_NAMES, get_builtin

DEFAULT_OUT = (
    pathlib.Path(__file__).resolve().parent.parent
    / "frontend" / "tests" / "fixtures" / "parity.json"
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(DEFAULT_OUT))
    ap.add_argument("--vectors", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    doc = {"seed": args.seed, "schemas": {}}
    for name in BUILTIN_NAMES:
        s = get_builtin(name)
        cases = []
        for _ in range(args.vectors):
            p = rng.uniform(0.0, 1.0, size=8)
            dist = soft_distribution(p, s)
            cases.append(
                {
                    "probs": [float(v) for v in p],
                    "values": {k: float(v) for k, v in dist.values.items()},
                }
            )
        binary = []
        for _ in range(10):
            q = (rng.uniform(size=8) > 0.5).astype(float)
            binary.append(
                {
                    "answers": [bool(v) for v in q],
                    "relation": convert(q, s).relation,
                    "ambiguous": convert(q, s).ambiguous,
                }
            )
        doc["schemas"][name] = {
            "relations": list(s.relation_names),
            "soft": cases,
            "convert": binary,
        }

    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    total = sum(len(v["soft"]) for v in doc["schemas"].values())
    print(f"wrote {total} soft cases across {len(doc['schemas'])} schemas to {out}")


if __name__ == "__main__":
    main()
