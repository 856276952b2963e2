"""Binary-decision quality measures: confusion counts, rates, RMSE, ROC, AUC."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn


def confusion(scores: Sequence[float], truths: Sequence[bool], threshold: float) -> ConfusionMatrix:
    """Tally predictions against truth; score >= threshold counts as a detection."""
    if len(scores) != len(truths):
        raise ValueError("scores and truths must have equal length")
    if not scores:
        raise ValueError("confusion requires at least one sample")
    tp = fp = tn = fn = 0
    for score, truth in zip(scores, truths):
        predicted = score >= threshold
        if predicted and truth:
            tp += 1
        elif predicted:
            fp += 1
        elif truth:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, tn, fn)


def rates(cm: ConfusionMatrix) -> tuple[float, float, float]:
    """(true-positive rate, false-positive rate, accuracy).

    Both classes must be present; a single-class tally has no defined TPR/FPR.
    """
    if cm.positives == 0 or cm.negatives == 0:
        raise ValueError("rates undefined: confusion matrix is missing a class")
    tpr = cm.tp / cm.positives
    fpr = cm.fp / cm.negatives
    acc = (cm.tp + cm.tn) / (cm.positives + cm.negatives)
    return tpr, fpr, acc


def rmse(expected: Sequence[float], predicted: Sequence[float]) -> float:
    """Root of the mean squared difference, normalised by the sample count."""
    if len(expected) != len(predicted):
        raise ValueError("expected and predicted must have equal length")
    if not expected:
        raise ValueError("rmse requires at least one sample")
    total = 0.0
    for e, p in zip(expected, predicted):
        d = e - p
        total += d * d
    return math.sqrt(total / len(expected))


@dataclass(frozen=True)
class RocCurve:
    """Operating points sorted by (fpr, tpr), spanning (0,0) to (1,1)."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise ValueError("a ROC curve needs at least two points")
        if self.points[0] != (0.0, 0.0) or self.points[-1] != (1.0, 1.0):
            raise ValueError("ROC curve must start at (0,0) and end at (1,1)")
        prev = (-1.0, -1.0)
        for fpr, tpr in self.points:
            if not (0.0 <= fpr <= 1.0 and 0.0 <= tpr <= 1.0):
                raise ValueError(f"ROC point ({fpr}, {tpr}) outside the unit square")
            if (fpr, tpr) < prev:
                raise ValueError("ROC points must be sorted by (fpr, tpr)")
            if tpr < prev[1]:
                raise ValueError("ROC tpr must be non-decreasing")
            prev = (fpr, tpr)


def roc(scores: Sequence[float], truths: Sequence[bool]) -> RocCurve:
    """Build a ROC curve from decision scores.

    Thresholds are the distinct observed scores in descending order plus a
    sentinel above the maximum; each threshold binarizes with `score >=
    threshold`. Requires both classes, otherwise the rates are undefined.
    """
    if len(scores) != len(truths):
        raise ValueError("scores and truths must have equal length")
    positives = sum(1 for t in truths if t)
    negatives = len(truths) - positives
    if positives == 0 or negatives == 0:
        raise ValueError("ROC undefined: need at least one sample of each class")
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    points: list[tuple[float, float]] = [(0.0, 0.0)]  # sentinel threshold above max
    tp = fp = 0
    i = 0
    while i < len(order):
        score = scores[order[i]]
        while i < len(order) and scores[order[i]] == score:
            if truths[order[i]]:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append((fp / negatives, tp / positives))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    points.sort()
    return RocCurve(tuple(points))


def auc(curve: RocCurve) -> float:
    """Area under a ROC curve by the trapezoidal rule."""
    area = 0.0
    for (f0, t0), (f1, t1) in zip(curve.points, curve.points[1:]):
        area += (f1 - f0) * (t0 + t1) / 2.0
    return area


def write_roc_csv(curve: RocCurve, path: str) -> None:
    """Export as a two-column CSV with an `fpr,tpr` header row."""
    lines = ["fpr,tpr"]
    lines.extend(f"{format(f, '.17g')},{format(t, '.17g')}" for f, t in curve.points)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_roc_csv(path: str) -> RocCurve:
    """Parse a curve previously written by write_roc_csv."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "fpr,tpr":
        raise ValueError("not a ROC CSV: missing fpr,tpr header")
    points = []
    for line in lines[1:]:
        if not line:
            continue
        f, _, t = line.partition(",")
        points.append((float(f), float(t)))
    return RocCurve(tuple(points))
