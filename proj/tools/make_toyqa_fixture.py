#!/usr/bin/env python3
"""Write a stand-in feature file for the toy-QA corpus.

The real features come from embed-extract (frozen encoder, [CLS] state per
(question, option) pair, three options concatenated). This script produces a
file with the same shape and layout without needing an encoder, so the C++
tests and default configs run offline. Each option slot is noise plus a shared
"answer" direction for the labelled option.

    python3 tools/make_toyqa_fixture.py data/toyqa.jsonl data/toyqa_features.bhft
"""

import argparse
import json
import struct

import numpy as np


def write_bhft(path, features, labels, n_classes):
    features = np.ascontiguousarray(features, dtype="<f4")
    n, d = features.shape
    with open(path, "wb") as f:
        f.write(b"BHFT")
        f.write(struct.pack("<HIII", 1, n, d, n_classes))
        f.write(features.tobytes())
        f.write(np.asarray(labels, dtype="<u4").tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("input")
    ap.add_argument("output")
    ap.add_argument("--dim", type=int, default=768)
    ap.add_argument("--seed", type=int, default=20240917)
    ap.add_argument("--signal", type=float, default=0.08)
    ap.add_argument("--noise", type=float, default=0.5)
    args = ap.parse_args()

    with open(args.input, encoding="utf-8") as f:
        records = [json.loads(line) for line in f if line.strip()]
    n_options = {len(r["options"]) for r in records}
    if len(n_options) != 1:
        raise SystemExit("records disagree on the option count")
    c = n_options.pop()

    rng = np.random.default_rng(args.seed)
    answer_dir = rng.standard_normal(args.dim)
    shared = rng.standard_normal(args.dim) * 0.2
    rows = []
    for r in records:
        slots = [shared + args.noise * rng.standard_normal(args.dim) for _ in range(c)]
        slots[r["label"]] = slots[r["label"]] + args.signal * answer_dir
        rows.append(np.concatenate(slots))
    labels = [r["label"] for r in records]
    write_bhft(args.output, np.stack(rows), labels, c)
    print(f"N={len(rows)} D={args.dim} D_total={c * args.dim} C={c} -> {args.output}")


if __name__ == "__main__":
    main()
