#!/usr/bin/env python3
"""Desk-scale pipeline demo: generate data, train the head, evaluate.

Generates a noisy synthetic dataset from configuration anchors, holds
out a test slice, trains with the default configuration, and prints
the evaluation report plus a per-epoch history tail.
"""
import argparse

import numpy as np

from pointrel.metrics import evaluate
from pointrel.schema import resolve_schema
from pointrel.sorter import TrainConfig, predict_batch, synth_generate, train


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--schema", default="tbdense")
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--sigma", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=13)
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--holdout", type=float, default=0.2)
    ap.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    ap.add_argument("--lr", type=float, default=TrainConfig.lr)
    ap.add_argument("--tau", type=float, default=TrainConfig.tau)
    args = ap.parse_args()

    s = resolve_schema(args.schema)
    data = synth_generate(args.n, args.sigma, args.seed, s, dim=args.dim)
    k = int(len(data) * (1 - args.holdout))
    train_split, test_split = data[:k], data[k:]
    print(f"{len(train_split)} train / {len(test_split)} held out, dim={args.dim}")

    cfg = TrainConfig(lr=args.lr, epochs=args.epochs, tau=args.tau)
    params, history = train(train_split, s, cfg)
    for h in history[-5:]:
        print(f"  epoch {h.epoch:3d}  loss {h.loss:.4f}  train micro-F1 {h.micro_f1:.4f}")

    x = np.stack([r.features for r in test_split])
    preds = predict_batch(x, params, cfg.tau, s)
    gold = [r.gold for r in test_split]
    print()
    print(evaluate(gold, preds, s).to_table())


if __name__ == "__main__":
    main()
