"""Exact-arithmetic references for scaler, Adam and report metrics.

Writes tests/fixtures/numeric_oracles.json.
"""
import json
import math
from fractions import Fraction
from pathlib import Path


def scaler_case():
    # Five dimensions; dimension 3 is constant so its std is 0.
    rows = [
        [0.5, -1.25, 3.0, 7.0, 0.1],
        [1.5, 0.75, 2.0, 7.0, 0.4],
        [2.5, 0.25, 4.5, 7.0, -0.2],
        [-0.5, 1.25, 1.0, 7.0, 0.3],
    ]
    n = len(rows)
    mean = [sum(Fraction(r[d]) for r in rows) / n for d in range(5)]
    var = [sum((Fraction(r[d]) - mean[d]) ** 2 for r in rows) / n for d in range(5)]
    std = [math.sqrt(v) for v in var]
    probe = [1.0, 0.0, 2.5, 7.0, 0.0]
    expected = []
    for d in range(5):
        denom = max(std[d], 1e-8)
        expected.append(float((Fraction(probe[d]) - mean[d])) / denom if std[d] > 0 else 0.0)
    return {"rows": rows, "mean": [float(m) for m in mean], "std": std, "probe": probe, "standardized": expected}


def adam_case():
    lr, b1, b2, eps = 0.001, 0.9, 0.999, 1e-8
    params = [0.5, -0.3, 0.0, 1.2, -2.0, 0.25]
    grads = [
        [0.1, -0.2, 0.0, 0.5, -1.0, 3.0],
        [0.05, 0.1, -0.3, 0.5, 0.0, -3.0],
        [-0.2, 0.0, 0.4, 0.5, 2.0, 1.0],
    ]
    m = [0.0] * len(params)
    v = [0.0] * len(params)
    trace = []
    p = list(params)
    for t, g in enumerate(grads, start=1):
        for i in range(len(p)):
            m[i] = b1 * m[i] + (1 - b1) * g[i]
            v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i]
            mhat = m[i] / (1 - b1 ** t)
            vhat = v[i] / (1 - b2 ** t)
            p[i] -= lr * mhat / (math.sqrt(vhat) + eps)
        trace.append(list(p))
    return {"initial": params, "grads": grads, "trace": trace}


def metrics_case():
    cm = [[5, 1, 0], [0, 4, 2], [1, 0, 7]]
    k = len(cm)
    total = sum(map(sum, cm))
    per = []
    for c in range(k):
        tp = cm[c][c]
        pred = sum(cm[r][c] for r in range(k))
        sup = sum(cm[c])
        p = Fraction(tp, pred) if pred else Fraction(0)
        r = Fraction(tp, sup) if sup else Fraction(0)
        f = 2 * p * r / (p + r) if p + r else Fraction(0)
        per.append((p, r, f, sup))
    macro = [sum(x[i] for x in per) / k for i in range(3)]
    weighted = [sum(x[i] * x[3] for x in per) / total for i in range(3)]
    acc = Fraction(sum(cm[i][i] for i in range(k)), total)
    return {
        "matrix": cm,
        "precision": [float(x[0]) for x in per],
        "recall": [float(x[1]) for x in per],
        "f1": [float(x[2]) for x in per],
        "support": [x[3] for x in per],
        "accuracy": float(acc),
        "macro": [float(x) for x in macro],
        "weighted": [float(x) for x in weighted],
    }


def main():
    doc = {"scaler": scaler_case(), "adam": adam_case(), "metrics": metrics_case()}
    out = Path(__file__).resolve().parent.parent / "fixtures" / "numeric_oracles.json"
    out.write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
