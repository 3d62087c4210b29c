#!/usr/bin/env python3
"""Convert a digits CSV (784 pixel columns, label last) into IDX files.

Rows are shuffled with a fixed seed so that leading train/holdout slices
contain every class.

    csv_to_idx.py mnist_5k.csv.gz data/mnist
"""

import argparse
import gzip
import pathlib
import struct

import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    opener = gzip.open if args.csv.endswith(".gz") else open
    with opener(args.csv, "rt") as f:
        a = np.loadtxt(f, delimiter=",")
    x = a[:, :-1].astype(np.uint8)
    y = a[:, -1].astype(np.uint8)
    if x.shape[1] != 28 * 28:
        raise SystemExit(f"expected 784 pixel columns, got {x.shape[1]}")
    order = np.random.default_rng(args.seed).permutation(len(y))
    x, y = x[order], y[order]

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "train-images-idx3-ubyte").write_bytes(struct.pack(">IIII", 2051, len(x), 28, 28) + x.tobytes())
    (out / "train-labels-idx1-ubyte").write_bytes(struct.pack(">II", 2049, len(y)) + y.tobytes())
    print(f"{len(y)} images, class counts {np.bincount(y, minlength=10).tolist()}")


if __name__ == "__main__":
    main()
