"""Dataset records, JSONL serialization, and symmetry augmentation."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import logic
from .errors import DuplicateId, ParseError, SplitViolation, UnknownRelation
from .points import (
    PointConfiguration,
    PointRelation,
    enumerate_consistent_configurations,
    swap_events,
)
from .schema import RelationSchema, project

SPLITS = ("train", "dev", "test")


@dataclass(frozen=True)
class PairRecord:
    id: str
    gold: str
    split: str = "train"
    features: np.ndarray = None
    gold_config: PointConfiguration = None


def _config_to_json(c: PointConfiguration) -> dict:
    return {"ss": c.ss.value, "ee": c.ee.value, "se": c.se.value, "es": c.es.value}


def _config_from_json(d: dict) -> PointConfiguration:
    return PointConfiguration(
        ss=PointRelation(d["ss"]),
        ee=PointRelation(d["ee"]),
        se=PointRelation(d["se"]),
        es=PointRelation(d["es"]),
    )


def read_pairs(path, schema: RelationSchema) -> list:
    """Order-preserving JSONL load with label and id validation."""
    names = set(schema.relation_names)
    out, seen = [], set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc.msg}", lineno) from exc
            try:
                rid = obj["id"]
                gold = obj["gold"]
            except KeyError as exc:
                raise ParseError(f"missing field {exc.args[0]!r}", lineno) from exc
            if rid in seen:
                raise DuplicateId(f"id {rid!r} appears twice (line {lineno})")
            seen.add(rid)
            if gold not in names:
                raise UnknownRelation(
                    f"record {rid!r} has label {gold!r}, not in schema {schema.name!r}"
                )
            split = obj.get("split", "train")
            if split not in SPLITS:
                raise ParseError(f"split must be one of {SPLITS}, got {split!r}", lineno)
            features = obj.get("features")
            config = obj.get("config")
            out.append(
                PairRecord(
                    id=rid,
                    gold=gold,
                    split=split,
                    features=None if features is None else np.asarray(features, dtype=float),
                    gold_config=None if config is None else _config_from_json(config),
                )
            )
    return out


def write_pairs(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            obj = {"id": r.id, "split": r.split, "gold": r.gold}
            if r.features is not None:
                obj["features"] = [float(v) for v in r.features]
            if r.gold_config is not None:
                obj["config"] = _config_to_json(r.gold_config)
            fh.write(json.dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# Symmetry augmentation
# ---------------------------------------------------------------------------

def symmetric_label_map(schema: RelationSchema) -> dict:
    """Image of each relation under swapping the two events.

    Derived by projecting every consistent configuration and its swap;
    for the built-in schemas this is single-valued (Before and After
    trade places, the two containment relations trade places, the
    symmetric relations map to themselves).
    """
    images = {name: set() for name in schema.relation_names}
    for c in enumerate_consistent_configurations("satisfiable"):
        images[project(c, schema)].add(project(swap_events(c), schema))
    out = {}
    for name, img in images.items():
        if len(img) > 1:
            raise ValueError(
                f"swapping events does not act on labels for {schema.name!r}: "
                f"{name} maps to {sorted(img)}"
            )
        out[name] = next(iter(img)) if img else name
    return out


def _swap_features(features: np.ndarray, rid: str):
    if features is None:
        return None
    d = features.shape[0]
    if d % 2:
        warnings.warn(
            f"record {rid!r} has odd feature length {d}; swapped copy reuses its features"
        )
        return features
    half = d // 2
    return np.concatenate([features[half:], features[:half]])


def symmetry_augment(data, schema: RelationSchema) -> list:
    """Originals plus one event-swapped copy of each (train only).

    Swapped copies get the mirrored label, the event-swapped gold
    configuration, exchanged feature halves, and an id suffixed #sym.
    """
    bad = [r.id for r in data if r.split != "train"]
    if bad:
        raise SplitViolation(
            f"only the train split may be augmented; offending ids: {bad[:5]}"
        )
    label_map = symmetric_label_map(schema)
    out = list(data)
    for r in data:
        out.append(
            replace(
                r,
                id=r.id + "#sym",
                gold=label_map[r.gold],
                features=_swap_features(r.features, r.id),
                gold_config=None if r.gold_config is None else swap_events(r.gold_config),
            )
        )
    return out


def split_sample(data, fraction: float, seed: int) -> list:
    """Seeded sample without replacement of floor(n*fraction), min 1.

    Original order is preserved; fraction 1.0 returns the list as is.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    if fraction == 1.0:
        return list(data)
    n = len(data)
    k = max(1, int(n * fraction))
    rng = np.random.default_rng(seed)
    idx = sorted(rng.choice(n, size=k, replace=False))
    return [data[i] for i in idx]


# ---------------------------------------------------------------------------
# Prediction files
# ---------------------------------------------------------------------------

def write_predictions(path, rows) -> None:
    """Rows are dicts with id plus either q (8 floats) or relation."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def read_predictions(path) -> list:
    out, seen = [], set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc.msg}", lineno) from exc
            if "id" not in obj:
                raise ParseError("missing field 'id'", lineno)
            if ("q" in obj) == ("relation" in obj):
                raise ParseError("need exactly one of 'q' or 'relation'", lineno)
            if "q" in obj and len(obj["q"]) != logic.NUM_ATOMS:
                raise ParseError(f"'q' must have {logic.NUM_ATOMS} entries", lineno)
            if obj["id"] in seen:
                raise DuplicateId(f"id {obj['id']!r} appears twice (line {lineno})")
            seen.add(obj["id"])
            out.append(obj)
    return out
