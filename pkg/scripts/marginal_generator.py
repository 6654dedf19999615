#!/usr/bin/env python3
"""Reference generator speaking the subprocess adapter protocol.

Fits independent per-column marginal tables to the training CSV, samples a
synthetic CSV from them, and scores records by summed negative log
probability of their cells (Laplace-smoothed), which doubles as a
log-perplexity for canary-exposure campaigns:

    marginal_generator.py [--state FILE] train --in real.csv --out syn.csv --seed 7
    marginal_generator.py [--state FILE] score --in records.csv

``score`` prints one value per data row.  Model state persists in --state
(default: marginal_generator_state.json in the working directory).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from collections import Counter


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return header, rows


def cmd_train(args):
    header, rows = read_csv(args.infile)
    tables = []
    for j, _name in enumerate(header):
        counts = Counter(row[j] for row in rows)
        tables.append(dict(counts))
    state = {"header": header, "tables": tables, "n": len(rows)}
    with open(args.state, "w", encoding="utf-8") as fh:
        json.dump(state, fh)

    import random

    rng = random.Random(args.seed)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for _ in range(len(rows)):
            record = []
            for table in tables:
                values = sorted(table)
                weights = [table[v] for v in values]
                record.append(rng.choices(values, weights=weights)[0])
            writer.writerow(record)
    return 0


def cmd_score(args):
    with open(args.state, "r", encoding="utf-8") as fh:
        state = json.load(fh)
    header, rows = read_csv(args.infile)
    order = [state["header"].index(name) for name in header]
    out = []
    for row in rows:
        logp = 0.0
        for j, pos in enumerate(order):
            table = state["tables"][pos]
            count = table.get(row[j], 0)
            total = state["n"] + len(table) + 1
            logp += -math.log((count + 1.0) / total)
        out.append(logp)
    sys.stdout.write("\n".join(f"{v:.12g}" for v in out) + "\n")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--state", default="marginal_generator_state.json")
    sub = parser.add_subparsers(dest="command", required=True)
    train = sub.add_parser("train")
    train.add_argument("--in", dest="infile", required=True)
    train.add_argument("--out", required=True)
    train.add_argument("--seed", type=int, default=0)
    train.set_defaults(fn=cmd_train)
    score = sub.add_parser("score")
    score.add_argument("--in", dest="infile", required=True)
    score.set_defaults(fn=cmd_score)
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
