"""Score thresholding by exact one-dimensional 2-means, and the MCC agreement measure."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AllEqualScores, DegenerateMCCWarning, LengthMismatch

TYPICAL, ATYPICAL = 0, 1


@dataclass(frozen=True)
class OutlierLabeling:
    """Binary labels (1 = atypical) with the centroids and boundary that produced them."""

    labels: np.ndarray
    centroid_low: float
    centroid_high: float
    boundary: float
    sse: float

    def apply(self, scores) -> np.ndarray:
        """Label new scores with the fitted boundary."""
        return (np.asarray(scores, dtype=float) >= self.boundary).astype(np.int8)

    @property
    def n_atypical(self) -> int:
        return int(self.labels.sum())

    def to_dict(self):
        return {"centroids": [self.centroid_low, self.centroid_high],
                "boundary": self.boundary, "sse": self.sse,
                "n_atypical": self.n_atypical,
                "labels": [int(v) for v in self.labels]}


def two_means_1d(scores) -> OutlierLabeling:
    """Globally optimal 2-means on a line.

    Every split between distinct sorted values is evaluated with prefix sums;
    the minimal within-cluster SSE wins (first split on exact ties).
    """
    x = np.asarray(scores, dtype=float).reshape(-1)
    if x.size < 2 or np.ptp(x) == 0:
        raise AllEqualScores("two_means_1d needs at least two distinct scores")
    xs = np.sort(x, kind="stable")
    # shift improves the conditioning of the prefix-sum SSE
    c = xs - xs.mean()
    n = c.size
    s1 = np.cumsum(c)
    s2 = np.cumsum(c * c)
    left_n = np.arange(1, n)
    right_n = n - left_n
    left_sse = s2[:-1] - s1[:-1] ** 2 / left_n
    right_sse = (s2[-1] - s2[:-1]) - (s1[-1] - s1[:-1]) ** 2 / right_n
    total = left_sse + right_sse
    valid = xs[1:] > xs[:-1]
    total = np.where(valid, total, np.inf)
    i = int(np.argmin(total))
    boundary = 0.5 * (xs[i] + xs[i + 1])
    low, high = xs[: i + 1], xs[i + 1:]
    labels = (x >= boundary).astype(np.int8)
    sse = float(((low - low.mean()) ** 2).sum() + ((high - high.mean()) ** 2).sum())
    return OutlierLabeling(labels, float(low.mean()), float(high.mean()), float(boundary), sse)


def confusion(a, b) -> tuple[int, int, int, int]:
    a = np.asarray(a).astype(bool)
    b = np.asarray(b).astype(bool)
    if a.shape != b.shape:
        raise LengthMismatch(f"label vectors have lengths {a.size} and {b.size}")
    tp = int(np.sum(a & b))
    tn = int(np.sum(~a & ~b))
    fp = int(np.sum(~a & b))
    fn = int(np.sum(a & ~b))
    return tp, fp, fn, tn


def mcc_with_flag(a, b) -> tuple[float, bool]:
    """MCC plus a flag that is True when the denominator vanished."""
    tp, fp, fn, tn = confusion(a, b)
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0, True
    value = (tp * tn - fp * fn) / math.sqrt(denom)
    return max(-1.0, min(1.0, value)), False


def mcc(a, b) -> float:
    """Matthews correlation of two binary labelings; 0 (with a warning) when undefined."""
    value, degenerate = mcc_with_flag(a, b)
    if degenerate:
        warnings.warn("MCC undefined for a one-class table; reporting 0",
                      DegenerateMCCWarning, stacklevel=2)
    return value


def accuracy(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise LengthMismatch(f"label vectors have lengths {a.size} and {b.size}")
    return float(np.mean(a == b)) if a.size else 1.0
