"""Kernel PCA on categorical rows with a Hamming kernel and survey-weighted centering.

The anomaly score of a row z is its squared feature-space distance to the
principal subspace, computed entirely through kernel evaluations::

    RE(z) = ||phi~(z)||^2 - sum_{i<=k*} (v_i . phi~(z))^2

where phi~ is the feature map centred on the weighted feature mean. For
training rows this equals the sum of squared projections on the discarded
components.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import CategoricalDataset, normalize_weights
from .errors import DegenerateData, DimensionMismatch, LengthMismatch, NotPSD, SurveyKitError

NEG_EIG_TOL = 1e-8
REL_ZERO_EIG = 1e-12


@dataclass(frozen=True)
class KernelConfig:
    gamma: float = 1.0
    variance_fraction: float = 0.95

    def __post_init__(self):
        if not self.gamma > 0:
            raise SurveyKitError("gamma must be positive")
        if not 0 < self.variance_fraction <= 1:
            raise SurveyKitError("variance_fraction must lie in (0, 1]")


def hamming(x, y) -> int:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise LengthMismatch(f"rows of length {x.size} and {y.size}")
    return int(np.count_nonzero(x != y))


def hamming_matrix(a, b=None) -> np.ndarray:
    """Pairwise Hamming distances between the rows of a and b."""
    a = np.asarray(a)
    b = a if b is None else np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise LengthMismatch("row sets must be 2-D with equal column counts")
    dist = np.zeros((a.shape[0], b.shape[0]), dtype=np.int32)
    for j in range(a.shape[1]):
        dist += a[:, j, None] != b[None, :, j]
    return dist


def kernel(x, y, cfg: KernelConfig = KernelConfig()) -> float:
    return float(np.exp(-cfg.gamma * hamming(x, y)))


def gram(a, b=None, gamma: float = 1.0) -> np.ndarray:
    return np.exp(-gamma * hamming_matrix(a, b))


@dataclass(frozen=True)
class CenteredGram:
    matrix: np.ndarray
    weights: np.ndarray
    row_means: np.ndarray   # sum_l w_l K_il
    grand_mean: float       # sum_lm w_l w_m K_lm


def center_gram(K, weights) -> CenteredGram:
    """Weighted double centering: subtract the weighted feature mean from both arguments."""
    K = np.asarray(K, dtype=float)
    w = np.asarray(weights, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or w.shape != (K.shape[0],):
        raise DimensionMismatch(f"Gram {K.shape} vs weights {w.shape}")
    r = K @ w
    g = float(w @ r)
    Kc = K - r[:, None] - r[None, :] + g
    Kc = 0.5 * (Kc + Kc.T)
    return CenteredGram(Kc, w, r, g)


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Make the first non-negligible entry of every column positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-10 * np.abs(col).max())
        if big.size and col[big[0]] < 0:
            out[:, j] = -col
    return out


@dataclass(frozen=True, eq=False)
class KpcaModel:
    eigenvalues: np.ndarray      # all eigenvalues, descending, clamped at 0
    alphas: np.ndarray           # n x k*, columns scaled so feature axes have unit norm
    n_components: int
    train_rows: np.ndarray
    weights: np.ndarray
    row_means: np.ndarray
    grand_mean: float
    train_diag: np.ndarray       # centred self-similarity of training rows
    config: KernelConfig

    @property
    def retained_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[: self.n_components]

    def project(self, rows) -> tuple[np.ndarray, np.ndarray]:
        """Projections on the retained axes and squared centred norms for new rows."""
        rows = np.atleast_2d(np.asarray(rows))
        if rows.shape[1] != self.train_rows.shape[1]:
            raise LengthMismatch(f"rows have {rows.shape[1]} columns, model expects "
                                 f"{self.train_rows.shape[1]}")
        kz = gram(self.train_rows, rows, self.config.gamma)          # n x m
        wk = self.weights @ kz                                        # m
        kc = kz - wk[None, :] - self.row_means[:, None] + self.grand_mean
        proj = kc.T @ self.alphas                                     # m x k*
        # k(z, z) = 1 for this kernel
        norms = 1.0 - 2.0 * wk + self.grand_mean
        return proj, norms

    def score(self, data) -> np.ndarray:
        rows = getattr(data, "rows", data)
        proj, norms = self.project(rows)
        return np.maximum(norms - np.sum(proj * proj, axis=1), 0.0)

    def training_scores(self, data=None) -> np.ndarray:
        """Scores of the training rows straight from the decomposition."""
        lam = self.retained_eigenvalues
        # v_i . phi~(x_j) = lambda_i * alpha_ji
        proj = self.alphas * lam[None, :]
        return np.maximum(self.train_diag - np.sum(proj * proj, axis=1), 0.0)


def retained_count(eigenvalues, variance_fraction: float) -> int:
    lam = np.asarray(eigenvalues, dtype=float)
    pos = lam[lam > 0]
    if pos.size == 0:
        return 0
    cum = np.cumsum(pos) / pos.sum()
    return int(np.searchsorted(cum, variance_fraction - 1e-12) + 1)


def fit(data, weights=None, cfg: KernelConfig = KernelConfig()) -> KpcaModel:
    """Eigen-decompose the weighted-centred Hamming Gram matrix."""
    rows = np.asarray(getattr(data, "rows", data))
    if rows.shape[0] < 2:
        raise DegenerateData("KPCA needs at least two rows")
    if weights is None:
        weights = data if isinstance(data, CategoricalDataset) else np.ones(rows.shape[0])
    w = normalize_weights(weights)
    K = gram(rows, None, cfg.gamma)
    cg = center_gram(K, w)
    lam, vecs = np.linalg.eigh(cg.matrix)
    order = np.argsort(-lam, kind="stable")
    lam, vecs = lam[order], vecs[:, order]
    if lam[-1] < -NEG_EIG_TOL:
        raise NotPSD(f"centred Gram has eigenvalue {lam[-1]:.3g}")
    lam = np.where(lam < 0, 0.0, lam)
    scale = lam[0]
    if scale <= 1e-12:
        raise DegenerateData("all rows identical; no variance to retain")
    lam = np.where(lam <= REL_ZERO_EIG * scale, 0.0, lam)
    k = retained_count(lam, cfg.variance_fraction)
    vecs = _fix_signs(vecs[:, :k])
    alphas = vecs / np.sqrt(lam[:k])[None, :]
    return KpcaModel(lam, alphas, k, rows.copy(), w, cg.row_means, cg.grand_mean,
                     np.diag(cg.matrix).copy(), cfg)


def reconstruction_error(model: KpcaModel, z) -> float | np.ndarray:
    """Score one row (returns float) or a 2-D block of rows (returns array)."""
    z = np.asarray(getattr(z, "rows", z))
    out = model.score(np.atleast_2d(z))
    return float(out[0]) if z.ndim == 1 else out


def save_model(model: KpcaModel, path) -> None:
    np.savez(path, eigenvalues=model.eigenvalues, alphas=model.alphas,
             n_components=model.n_components, train_rows=model.train_rows,
             weights=model.weights, row_means=model.row_means,
             grand_mean=model.grand_mean, train_diag=model.train_diag,
             gamma=model.config.gamma, variance_fraction=model.config.variance_fraction)


def load_model(path) -> KpcaModel:
    with np.load(path) as f:
        cfg = KernelConfig(float(f["gamma"]), float(f["variance_fraction"]))
        return KpcaModel(f["eigenvalues"], f["alphas"], int(f["n_components"]),
                         f["train_rows"], f["weights"], f["row_means"],
                         float(f["grand_mean"]), f["train_diag"], cfg)


class KpcaDetector:
    """Fit-and-score adapter used by the validation and importance routines."""

    name = "kpca"
    score_key = "re_kpca"
    refit_for_stability = True

    def __init__(self, config: KernelConfig = KernelConfig()):
        self.config = config

    def fit(self, data: CategoricalDataset, weights=None) -> KpcaModel:
        return fit(data, data if weights is None else weights, self.config)
