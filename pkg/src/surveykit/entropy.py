"""Univariate entropy score per variable and information content per category."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import CategoricalDataset, normalize_weights
from .errors import BadVariableIndex, DegenerateVariableWarning, InvalidMarginal


def weighted_frequencies(data: CategoricalDataset, weights=None, variable: int = 0) -> np.ndarray:
    """Survey-weighted category shares of one variable (sums to 1)."""
    if not 0 <= variable < data.p:
        raise BadVariableIndex(f"variable index {variable} out of range for p={data.p}")
    w = normalize_weights(data if weights is None else weights)
    k = data.specs[variable].n_categories
    freqs = np.bincount(data.rows[:, variable], weights=w, minlength=k)
    return freqs / freqs.sum()


def gamma1(freqs) -> float:
    """Normalized entropy complement: 0 for uniform, 1 for a point mass.

    Only categories with nonzero frequency count towards k.
    """
    p = np.asarray(freqs, dtype=float)
    if np.any(p < 0) or not np.isfinite(p).all():
        raise InvalidMarginal("frequencies must be nonnegative and finite")
    if abs(p.sum() - 1.0) > 1e-6:
        raise InvalidMarginal(f"frequencies sum to {p.sum()!r}")
    p = p[p > 0]
    k = p.size
    if k < 2:
        warnings.warn("fewer than two observed categories; score set to 1",
                      DegenerateVariableWarning, stacklevel=2)
        return 1.0
    score = 1.0 + float(np.sum(p * np.log(p))) / math.log(k)
    return min(1.0, max(0.0, score))


def information_content(freqs) -> np.ndarray:
    """-log p per category in nats; +inf marks an unobserved category."""
    p = np.asarray(freqs, dtype=float)
    with np.errstate(divide="ignore"):
        out = -np.log(p)
    # -log 1 is -0.0
    return out + 0.0


@dataclass
class CategoryInfo:
    label: str
    freq: float
    info_nats: float

    def to_dict(self):
        observed = math.isfinite(self.info_nats)
        return {"label": self.label, "freq": self.freq,
                "info_nats": self.info_nats if observed else None,
                "observed": observed}


@dataclass
class VariableEntropy:
    variable: str
    gamma1: float
    observed_categories: int
    categories: list[CategoryInfo]
    degenerate: bool = False
    cluster_label: str | None = None

    def to_dict(self):
        return {"variable": self.variable, "gamma1": self.gamma1,
                "cluster_label": self.cluster_label,
                "observed_category_count": self.observed_categories,
                "degenerate": self.degenerate,
                "categories": [c.to_dict() for c in self.categories]}

    @property
    def most_informative(self) -> CategoryInfo:
        """Observed category with the highest information content."""
        seen = [c for c in self.categories if math.isfinite(c.info_nats)]
        return max(seen, key=lambda c: c.info_nats)


@dataclass
class EntropyReport:
    variables: list[VariableEntropy] = field(default_factory=list)

    @property
    def scores(self) -> np.ndarray:
        return np.array([v.gamma1 for v in self.variables])

    def __getitem__(self, name) -> VariableEntropy:
        for v in self.variables:
            if v.variable == name:
                return v
        raise KeyError(name)

    def ranked(self) -> list[VariableEntropy]:
        return sorted(self.variables, key=lambda v: -v.gamma1)

    def to_dict(self):
        return [v.to_dict() for v in self.ranked()]


def variable_entropy(data: CategoricalDataset, weights, variable: int) -> VariableEntropy:
    spec = data.specs[variable]
    freqs = weighted_frequencies(data, weights, variable)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateVariableWarning)
        score = gamma1(freqs)
    info = information_content(freqs)
    cats = [CategoryInfo(lbl, float(f), float(c))
            for lbl, f, c in zip(spec.categories, freqs, info)]
    return VariableEntropy(spec.name, score, int(np.count_nonzero(freqs)), cats,
                           degenerate=bool(caught))


def entropy_report(data: CategoricalDataset, weights=None) -> EntropyReport:
    """Score every variable of a dataset; cluster labels are filled by the caller."""
    w = normalize_weights(data if weights is None else weights)
    return EntropyReport([variable_entropy(data, w, j) for j in range(data.p)])


def score_variables(data: CategoricalDataset, weights=None) -> np.ndarray:
    """Entropy scores in variable order; the item scores used for labeling."""
    return entropy_report(data, weights).scores
