"""Independent reference implementations used to check the library.

These deliberately avoid the library's code paths: concordance is counted
pair by pair, average precision is accumulated rank by rank, and curve areas
use numpy's trapezoid directly.
"""

from __future__ import annotations

import numpy as np


def pairwise_concordance(scores, labels) -> float:
    """Mann-Whitney concordance over all positive/negative pairs, ties = 0.5."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    diff = pos[:, None] - neg[None, :]
    wins = np.sum(diff > 0) + 0.5 * np.sum(diff == 0)
    return float(wins) / (len(pos) * len(neg))


def average_precision_by_rank(scores, labels) -> float:
    """Mean precision at each positive's rank, descending scores (no ties)."""
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    hits = 0
    precisions = []
    for rank, i in enumerate(order, start=1):
        if labels[i] == 1:
            hits += 1
            precisions.append(hits / rank)
    return sum(precisions) / hits


def trapezoid_area(points) -> float:
    """Area under a polyline of CurvePoints via the trapezoid rule."""
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    return float(np.trapezoid(ys, xs))


def central_difference_gradient(fn, theta: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    grad = np.zeros_like(theta, dtype=float)
    for j in range(len(theta)):
        up = theta.copy()
        down = theta.copy()
        up[j] += h
        down[j] -= h
        grad[j] = (fn(up) - fn(down)) / (2 * h)
    return grad
