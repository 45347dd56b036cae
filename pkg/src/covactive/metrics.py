"""Classification scores, learning-curve area, sampling bias and normalisation."""
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ClassScores",
    "precision_recall_f1",
    "macro_f1",
    "trapezoid_auc",
    "sampling_bias",
    "class_entropy",
    "min_max_normalize",
]


@dataclass(frozen=True)
class ClassScores:
    """Per-class one-vs-rest scores; ``macro_f1`` averages over classes present in the truths."""

    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    macro_f1: float


def precision_recall_f1(predictions, truths, n_classes=None):
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(truths, dtype=np.int64)
    if pred.shape != true.shape:
        raise ValueError(f"length mismatch: {pred.shape[0]} predictions vs {true.shape[0]} truths")
    if true.size == 0:
        raise ValueError("need at least one prediction")
    K = int(max(pred.max(), true.max()) + 1) if n_classes is None else int(n_classes)
    tp = np.bincount(true[pred == true], minlength=K).astype(np.float64)
    pred_count = np.bincount(pred, minlength=K).astype(np.float64)
    support = np.bincount(true, minlength=K)
    fp = pred_count - tp
    fn = support - tp
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(tp + fp > 0, tp / (tp + fp), 0.0)
        recall = np.where(tp + fn > 0, tp / (tp + fn), 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)
    present = support > 0
    return ClassScores(precision, recall, f1, support, float(f1[present].mean()))


def macro_f1(predictions, truths, n_classes=None):
    return precision_recall_f1(predictions, truths, n_classes).macro_f1


def trapezoid_auc(x, y=None):
    """Area under a piecewise-linear curve.

    Accepts either ``(x, y)`` arrays or one sequence of ``(x, y)`` points.
    """
    if y is None:
        pts = np.asarray(x, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("expected a sequence of (x, y) points")
        x, y = pts[:, 0], pts[:, 1]
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D and equally long")
    if x.size < 2:
        raise ValueError("need at least two curve points")
    if np.any(np.diff(x) <= 0):
        raise ValueError("x must be strictly increasing")
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


def class_entropy(counts, base=None):
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty class counts")
    p = counts[counts > 0] / total
    h = float(-(p * np.log(p)).sum())
    return h / np.log(base) if base else h


def sampling_bias(labels, n_classes, base=None):
    """``1 - H(labeled classes) / log(K)``; 0 when balanced, 1 for a single class."""
    K = int(n_classes)
    if K < 2:
        raise ValueError("sampling bias needs at least two classes")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("sampling bias of an empty pool is undefined")
    if labels.min() < 0 or labels.max() >= K:
        raise ValueError("label outside 0..K-1")
    counts = np.bincount(labels, minlength=K)
    if np.all(counts == counts[0]):
        return 0.0
    h = class_entropy(counts, base)
    h_bal = np.log(K) / (np.log(base) if base else 1.0)
    return float(min(max(1.0 - h / h_bal, 0.0), 1.0))


def min_max_normalize(values):
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("nothing to normalise")
    lo, hi = v.min(), v.max()
    if hi == lo:
        warnings.warn("all values equal; returning 0.5 for each", RuntimeWarning, stacklevel=2)
        return np.full(v.shape, 0.5)
    return (v - lo) / (hi - lo)
