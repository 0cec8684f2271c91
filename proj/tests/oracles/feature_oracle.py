"""Straight-line Euclidean reference for the 141-D feature layout.

Writes tests/fixtures/feature_frame.json: a random two-hand frame and the
expected feature vector, computed without any shared code.
"""
import json
import math
import random
from pathlib import Path

WRIST = 0
TIPS = [4, 8, 12, 16, 20]


def dist(a, b):
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def features(left, right):
    zero = [[0.0, 0.0, 0.0]] * 21
    l = left if left is not None else zero
    r = right if right is not None else zero
    out = [c for p in l for c in p] + [c for p in r for c in p]
    out += [dist(l[WRIST], l[t]) for t in TIPS]
    out += [dist(r[WRIST], r[t]) for t in TIPS]
    out += [dist(l[t], r[t]) for t in TIPS]
    return out


def main():
    rng = random.Random(20240318)
    hand = lambda: [[rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(-0.2, 0.2)] for _ in range(21)]
    left, right = hand(), hand()
    one = hand()
    doc = {
        "two_hands": {"frame": {"left": left, "right": right}, "expected": features(left, right)},
        "right_only": {"frame": {"left": None, "right": one}, "expected": features(None, one)},
    }
    out = Path(__file__).resolve().parent.parent / "fixtures" / "feature_frame.json"
    out.write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
