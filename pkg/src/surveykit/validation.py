"""Stability (leave-one-out) and internal (k-fold) validation, and permutation importance.

A detector is any object with ``fit(data, weights) -> model`` where the model
offers ``score(rows)`` and ``training_scores(data)``. ``items`` says what the
labels are attached to: rows (KPCA, autoencoder) or variables (entropy score).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .dataset import CategoricalDataset, normalize_weights
from .entropy import score_variables
from .errors import SurveyKitError, UnreliableMetricWarning
from .labeling import accuracy, mcc_with_flag, two_means_1d


class EntropyFit:
    def __init__(self, scores):
        self.scores = np.asarray(scores)

    def training_scores(self, data=None):
        return self.scores


class EntropyDetector:
    name = "entropy"
    score_key = "gamma1"
    items = "variables"
    refit_for_stability = True

    def fit(self, data: CategoricalDataset, weights=None) -> EntropyFit:
        return EntropyFit(score_variables(data, data.weights if weights is None else weights))


def _items(detector) -> str:
    return getattr(detector, "items", "rows")


def _weights(data, weights):
    return normalize_weights(data.weights if weights is None else weights)


@dataclass
class ValidationReport:
    scheme: str
    detector: str
    mcc_mean: float
    mcc_ci_low: float
    mcc_ci_high: float
    mcc_values: list[float] = field(default_factory=list)
    degenerate: int = 0
    refit: bool = True

    @property
    def n_iterations(self) -> int:
        return len(self.mcc_values)

    def to_dict(self):
        return {"scheme": self.scheme, "detector": self.detector,
                "mcc_mean": self.mcc_mean, "mcc_ci_low": self.mcc_ci_low,
                "mcc_ci_high": self.mcc_ci_high, "iterations": self.n_iterations,
                "degenerate_iterations": self.degenerate, "refit": self.refit,
                "mcc_values": self.mcc_values}


def mean_ci(values, level: float = 0.95) -> tuple[float, float, float]:
    """Mean with a normal-approximation interval, clipped to [-1, 1]."""
    v = np.asarray(values, dtype=float)
    mean = float(v.mean())
    if v.size < 2:
        return mean, mean, mean
    half = stats.norm.ppf(0.5 + level / 2) * v.std(ddof=1) / math.sqrt(v.size)
    return mean, max(-1.0, mean - half), min(1.0, mean + half)


def _report(scheme, detector, values, flags, refit) -> ValidationReport:
    mean, lo, hi = mean_ci(values)
    return ValidationReport(scheme, getattr(detector, "name", type(detector).__name__),
                            mean, lo, hi, [float(v) for v in values], int(sum(flags)), refit)


def full_labels(detector, data, weights=None):
    """Fit on all rows and label the items; returns (model, labeling)."""
    w = _weights(data, weights)
    model = detector.fit(data, w)
    return model, two_means_1d(model.training_scores(data))


def stability_validation(detector, data: CategoricalDataset, weights=None, *,
                         refit: bool | None = None, max_iterations: int | None = None,
                         seed: int = 0) -> ValidationReport:
    """Leave one row out, relabel, and compare with the full-data labels by MCC.

    With ``refit`` False only the 2-means threshold is refitted on the remaining
    scores of the full-data model. ``max_iterations`` caps the number of left-out
    rows, drawn without replacement from a seeded generator.
    """
    if data.n < 3:
        raise SurveyKitError("stability validation needs n >= 3")
    w = _weights(data, weights)
    if refit is None:
        refit = getattr(detector, "refit_for_stability", True)
    model, reference = full_labels(detector, data, w)
    full_scores = model.training_scores(data)
    held = np.arange(data.n)
    if max_iterations is not None and max_iterations < data.n:
        held = np.sort(np.random.default_rng(seed).choice(data.n, max_iterations, replace=False))
    by_variable = _items(detector) == "variables"
    values, flags = [], []
    for i in held:
        keep = np.ones(data.n, dtype=bool)
        keep[i] = False
        if refit:
            sub = data.subset(keep)
            scores = detector.fit(sub, w[keep]).training_scores(sub)
        else:
            scores = full_scores if by_variable else full_scores[keep]
        target = reference.labels if by_variable else reference.labels[keep]
        labels = two_means_1d(scores).labels
        value, flag = mcc_with_flag(labels, target)
        values.append(value)
        flags.append(flag)
    return _report("leave_one_out", detector, values, flags, refit)


def fold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    order = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(order, folds)]


def internal_validation(detector, data: CategoricalDataset, weights=None, *,
                        folds: int = 10, seed: int = 0) -> ValidationReport:
    """k-fold check: train on k-1 folds, label the held-out fold, compare by MCC."""
    if data.n < folds:
        raise SurveyKitError(f"n={data.n} is smaller than the fold count {folds}")
    w = _weights(data, weights)
    _, reference = full_labels(detector, data, w)
    by_variable = _items(detector) == "variables"
    values, flags = [], []
    for held in fold_indices(data.n, folds, seed):
        train_mask = np.ones(data.n, dtype=bool)
        train_mask[held] = False
        train = data.subset(train_mask)
        model = detector.fit(train, w[train_mask])
        threshold = two_means_1d(model.training_scores(train))
        if by_variable:
            labels, target = threshold.labels, reference.labels
        else:
            labels = threshold.apply(model.score(data.rows[held]))
            target = reference.labels[held]
        value, flag = mcc_with_flag(labels, target)
        values.append(value)
        flags.append(flag)
    return _report(f"{folds}_fold", detector, values, flags, True)


@dataclass
class VariableImportance:
    variable: str
    mean: float
    ci_low: float
    ci_high: float
    values: list[float]

    def to_dict(self):
        return {"variable": self.variable, "mean_importance": self.mean,
                "ci_low": self.ci_low, "ci_high": self.ci_high,
                "permutations": len(self.values)}


@dataclass
class ImportanceReport:
    detector: str
    reps: int
    variables: list[VariableImportance]

    def ranked(self) -> list[VariableImportance]:
        return sorted(self.variables, key=lambda v: -v.mean)

    def __getitem__(self, name) -> VariableImportance:
        for v in self.variables:
            if v.variable == name:
                return v
        raise KeyError(name)

    def to_dict(self):
        return {"detector": self.detector, "permutations": self.reps,
                "variables": [v.to_dict() for v in self.ranked()]}


def jackknife_ci(values, level: float = 0.95) -> tuple[float, float, float]:
    """Mean of the replicates with a jackknife standard error and t interval."""
    v = np.asarray(values, dtype=float)
    m = v.size
    loo = (v.sum() - v) / (m - 1)
    se = math.sqrt((m - 1) / m * np.sum((loo - loo.mean()) ** 2))
    half = stats.t.ppf(0.5 + level / 2, m - 1) * se
    mean = float(v.mean())
    return mean, mean - half, mean + half


def permutation_importance(detector, data: CategoricalDataset, weights=None, *,
                           reps: int = 30, seed: int = 0, fitted=None) -> ImportanceReport:
    """Shuffle one column at a time and measure the share of flipped labels.

    Importance of a permutation is 1 - accuracy of the new labels (from the
    fitted threshold) against the labels of the unperturbed data.
    """
    if _items(detector) != "rows":
        raise SurveyKitError("permutation importance needs a row-level detector")
    if reps < 2:
        raise SurveyKitError("at least 2 permutations are needed for a jackknife interval")
    if reps == 2:
        warnings.warn("jackknife interval from only 2 permutations", UnreliableMetricWarning,
                      stacklevel=2)
    w = _weights(data, weights)
    if fitted is None:
        fitted = full_labels(detector, data, w)
    model, reference = fitted
    ref_scores = model.training_scores(data)
    rng = np.random.default_rng(seed)
    out = []
    for j, spec in enumerate(data.specs):
        vals = []
        for _ in range(reps):
            column = rng.permutation(data.rows[:, j])
            changed = column != data.rows[:, j]
            scores = ref_scores.copy()
            if changed.any():
                rows = data.rows[changed].copy()
                rows[:, j] = column[changed]
                # a row's score depends on that row alone once the model is fixed
                scores[changed] = model.score(rows)
            labels = reference.apply(scores)
            vals.append(1.0 - accuracy(labels, reference.labels))
        mean, lo, hi = jackknife_ci(vals)
        out.append(VariableImportance(spec.name, mean, lo, hi, vals))
    return ImportanceReport(getattr(detector, "name", type(detector).__name__), reps, out)
