#!/usr/bin/env python3
"""Regenerates the bundled CSV datasets.

balance_scale.csv is the real UCI Balance Scale dataset, which is fully
determined by its generating rule (left-weight*left-distance vs
right-weight*right-distance over all 5^4 combinations).

The other five files are seeded synthetic stand-ins with the same schema
(feature count, class labels, approximate class priors and sample counts)
as the corresponding UCI datasets, with class separation tuned so a small
MLP reaches a similar test accuracy. Replace them with real UCI exports
(same column names) to run on the original data; the toolchain only sees
the CSVs and manifests.
"""

import csv
import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def write_csv(name, header, rows):
    path = os.path.join(HERE, name)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def balance_scale():
    rows = []
    for lw in range(1, 6):
        for ld in range(1, 6):
            for rw in range(1, 6):
                for rd in range(1, 6):
                    l, r = lw * ld, rw * rd
                    label = "B" if l == r else ("L" if l > r else "R")
                    rows.append([lw, ld, rw, rd, label])
    write_csv("balance_scale.csv",
              ["left_weight", "left_distance", "right_weight",
               "right_distance", "class"], rows)


def gaussian_blobs(name, n, d, labels, priors, sep, seed, ordinal=False,
                   label_col="class"):
    rng = np.random.default_rng(seed)
    c = len(labels)
    if ordinal:
        # class means along one latent direction: adjacent classes overlap
        direction = rng.normal(size=d)
        direction /= np.linalg.norm(direction)
        jitter = rng.normal(size=(c, d)) * 0.25
        means = np.array([direction * sep * k for k in range(c)]) + jitter
    else:
        means = rng.normal(size=(c, d)) * sep
    scales = rng.uniform(0.6, 1.4, size=d)
    offsets = rng.uniform(0.0, 10.0, size=d)
    feature_scale = rng.uniform(0.5, 5.0, size=d)

    counts = np.floor(np.array(priors) / np.sum(priors) * n).astype(int)
    while counts.sum() < n:
        counts[int(np.argmax(priors))] += 1

    rows = []
    for k in range(c):
        x = means[k] + rng.normal(size=(counts[k], d)) * scales
        x = x * feature_scale + offsets
        for row in x:
            rows.append([f"{v:.4f}" for v in row] + [labels[k]])
    order = rng.permutation(len(rows))
    rows = [rows[i] for i in order]
    write_csv(name, [f"f{i}" for i in range(d)] + [label_col], rows)


def main():
    balance_scale()
    gaussian_blobs("cardio.csv", 2126, 21,
                   ["normal", "suspect", "pathologic"],
                   [0.78, 0.14, 0.08], sep=0.42, seed=101)
    gaussian_blobs("red_wine.csv", 1599, 11,
                   ["3", "4", "5", "6", "7", "8"],
                   [10, 53, 681, 638, 199, 18], sep=0.3, seed=102,
                   ordinal=True, label_col="quality")
    gaussian_blobs("white_wine.csv", 4898, 11,
                   ["3", "4", "5", "6", "7", "8", "9"],
                   [20, 163, 1457, 2198, 880, 175, 5], sep=0.95, seed=103,
                   ordinal=True, label_col="quality")
    gaussian_blobs("seeds.csv", 210, 7,
                   ["Kama", "Rosa", "Canadian"],
                   [70, 70, 70], sep=2.6, seed=104)
    gaussian_blobs("vertebral.csv", 310, 6,
                   ["DH", "SL", "NO"],
                   [60, 150, 100], sep=0.65, seed=105)


if __name__ == "__main__":
    main()
