#!/usr/bin/env python3
"""Regenerate the bundled UCI datasets under data/.

wine.csv    -- UCI Wine (178 x 13, 3 classes), taken from scikit-learn's bundled copy.
balance.csv -- UCI Balance Scale (625 x 4, 3 classes). The original dataset is the
               full enumeration of left/right weight and distance in 1..5, labelled
               by which side the torque tips, so it is rebuilt exactly here.
"""
import csv
import itertools
import pathlib

out = pathlib.Path(__file__).resolve().parent.parent / "data"
out.mkdir(exist_ok=True)

from sklearn.datasets import load_wine  # noqa: E402

wine = load_wine()
with open(out / "wine.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(list(wine.feature_names) + ["class"])
    for row, label in zip(wine.data, wine.target):
        w.writerow([repr(float(v)) for v in row] + [f"class_{label + 1}"])

with open(out / "balance.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["left_weight", "left_distance", "right_weight", "right_distance", "class"])
    for lw, ld, rw, rd in itertools.product(range(1, 6), repeat=4):
        left, right = lw * ld, rw * rd
        label = "L" if left > right else ("R" if right > left else "B")
        w.writerow([lw, ld, rw, rd, label])
