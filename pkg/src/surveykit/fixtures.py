"""Synthetic categorical datasets with known structure, for tests and demos."""
from __future__ import annotations

import numpy as np

from .dataset import CategoricalDataset, VariableSpec, generate_fixture
from .tables import N_RESPONDENTS, VARIABLE_ORDER, survey_marginals

FIXTURES = ("survey", "separable", "blobs", "kpca_subgroups", "ae_subgroups")

# variables whose rarest categories mark injected rows
DEFAULT_DRIVERS = ("TIPSCU", "SEV_MAT_DEPRIV")


def _specs(p, k, prefix="V"):
    return [VariableSpec(f"{prefix}{j + 1}", [f"c{c}" for c in range(k)]) for j in range(p)]


def survey_fixture(n: int = N_RESPONDENTS, seed: int = 0, n_injected: int = 0,
                   drivers=DEFAULT_DRIVERS) -> tuple[CategoricalDataset, np.ndarray]:
    """Rows drawn from the reference and synthetic marginals of the 19 survey variables.

    The last ``n_injected`` rows get, for every driver variable, the observed
    category whose code lies farthest from the modal code (rarer wins ties);
    their other cells stay as drawn. Returns the dataset and
    the indices of injected rows.
    """
    pairs = survey_marginals(VARIABLE_ORDER)
    data = generate_fixture(pairs, n, seed)
    if not n_injected:
        return data, np.array([], dtype=np.int64)
    rows = data.rows.copy()
    idx = np.arange(n - n_injected, n)
    for j, (spec, probs) in enumerate(pairs):
        if spec.name in drivers:
            p = np.asarray(probs, dtype=float)
            codes = np.arange(p.size)
            far = np.where(p > 0, np.abs(codes - np.argmax(p)), -1)
            # sort key: distance first, then rarity
            rows[idx, j] = int(np.lexsort((p, -far))[0])
    return data.with_rows(rows), idx


def separable_fixture(n: int = 100, atypical_every: int = 5) -> tuple[CategoricalDataset, np.ndarray]:
    """Deterministic fixture with a clean split for both row and variable detectors.

    U1-U4 cycle through four categories (uniform, entropy score 0); D1-D4 are
    0 for typical rows and 1 for every ``atypical_every``-th row.
    """
    i = np.arange(n)
    flag = (i % atypical_every == atypical_every - 1).astype(np.int64)
    uni = np.column_stack([(i // 4 ** j) % 4 for j in range(4)])
    rows = np.column_stack([uni] + [flag] * 4)
    specs = (_specs(4, 4, "U") + [VariableSpec(f"D{j + 1}", ["common", "rare"], "binary")
                                  for j in range(4)])
    return CategoricalDataset(specs, rows), np.flatnonzero(flag)


class CountDetector:
    """Scores a row by the number of nonzero codes in ``columns`` (all by default)."""

    name = "count"
    score_key = "count"
    refit_for_stability = True

    def __init__(self, columns=None):
        self.columns = columns

    def fit(self, data, weights=None):
        return _CountModel(self.columns, data)


class _CountModel:
    def __init__(self, columns, data):
        self.columns = columns
        self._train = data

    def score(self, data):
        rows = np.atleast_2d(np.asarray(getattr(data, "rows", data)))
        cols = slice(None) if self.columns is None else list(self.columns)
        return np.count_nonzero(rows[:, cols], axis=1).astype(float)

    def training_scores(self, data=None):
        return self.score(self._train if data is None else data)


def blob_fixture(k: int, size: int = 15, p: int = 19, n_categories: int = 4,
                 flip: float = 0.15, seed: int = 0) -> tuple[CategoricalDataset, np.ndarray]:
    """k planted groups: random centres, each member flips a cell with probability ``flip``."""
    rng = np.random.default_rng(seed)
    centres = rng.integers(0, n_categories, size=(k, p))
    truth = np.repeat(np.arange(k), size)
    rows = centres[truth].copy()
    mask = rng.random(rows.shape) < flip
    shift = rng.integers(1, n_categories, size=rows.shape)
    rows = np.where(mask, (rows + shift) % n_categories, rows)
    return CategoricalDataset(_specs(p, n_categories), rows), truth


def _planted(n_bulk, n_protos, groups, size, p, k_bulk, k_total, noise, seed):
    """Bulk rows copy a few low-code prototypes; each planted group sits near a
    distinct centre built from the high codes, with ``noise`` cells redrawn per row."""
    rng = np.random.default_rng(seed)
    protos = rng.integers(0, k_bulk, size=(n_protos, p))
    bulk = protos[rng.integers(0, n_protos, size=n_bulk)]
    centres = rng.integers(k_bulk, k_total, size=(groups, p))
    truth = np.repeat(np.arange(groups), size)
    out = centres[truth].copy()
    for r in range(out.shape[0]):
        cells = rng.choice(p, size=noise, replace=False)
        out[r, cells] = rng.integers(k_bulk, k_total, size=noise)
    rows = np.vstack([bulk, out])
    labels = np.concatenate([np.full(n_bulk, -1), truth])
    return CategoricalDataset(_specs(p, k_total), rows), labels


def kpca_subgroup_fixture(seed: int = 0) -> tuple[CategoricalDataset, np.ndarray]:
    """1000 prototype copies plus 4 planted groups of 8; labels are -1 for bulk rows."""
    return _planted(1000, 5, 4, 8, 19, 3, 8, 2, seed)


def ae_subgroup_fixture(seed: int = 0) -> tuple[CategoricalDataset, np.ndarray]:
    """1000 prototype copies plus 7 planted groups of 8; labels are -1 for bulk rows."""
    return _planted(1000, 5, 7, 8, 19, 3, 10, 2, seed)


def make_fixture(name: str, seed: int = 0, **kw) -> tuple[CategoricalDataset, np.ndarray]:
    if name == "survey":
        return survey_fixture(seed=seed, **kw)
    if name == "separable":
        return separable_fixture(**kw)
    if name == "blobs":
        return blob_fixture(kw.pop("k", 3), seed=seed, **kw)
    if name == "kpca_subgroups":
        return kpca_subgroup_fixture(seed)
    if name == "ae_subgroups":
        return ae_subgroup_fixture(seed)
    raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
