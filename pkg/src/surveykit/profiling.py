"""Subgroup discovery among outliers: spectral clustering, silhouette choice of k, medoids."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import KMeans

from .errors import SingleCluster, TooFewItems
from .kpca import hamming_matrix

AFFINITY_FLOOR = 1e-12


def _canonical(labels) -> np.ndarray:
    """Renumber clusters by order of first appearance."""
    labels = np.asarray(labels)
    mapping = {}
    for v in labels:
        mapping.setdefault(int(v), len(mapping))
    return np.array([mapping[int(v)] for v in labels], dtype=np.int64)


def spectral_embedding(rows, k: int, gamma: float = 1.0) -> np.ndarray:
    """Row-normalized top-k eigenvectors of the normalized Hamming-kernel affinity."""
    A = np.exp(-gamma * hamming_matrix(rows)) + AFFINITY_FLOOR
    np.fill_diagonal(A, 0.0)
    d = A.sum(axis=1)
    inv = 1.0 / np.sqrt(d)
    M = inv[:, None] * A * inv[None, :]
    lam, vecs = np.linalg.eigh(0.5 * (M + M.T))
    U = vecs[:, np.argsort(-lam, kind="stable")[:k]]
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    return U / np.where(norms > 0, norms, 1.0)


def spectral_cluster(rows, k: int, *, seed: int = 0, gamma: float = 1.0,
                     n_init: int = 10) -> np.ndarray:
    rows = np.asarray(getattr(rows, "rows", rows))
    m = rows.shape[0]
    if k < 2 or m < k:
        raise TooFewItems(f"cannot form {k} clusters from {m} items")
    if k == m:
        return np.arange(m)
    U = spectral_embedding(rows, k, gamma)
    km = KMeans(n_clusters=k, n_init=n_init, random_state=seed).fit(U)
    return _canonical(km.labels_)


def silhouette(rows, labels, dist=None) -> float:
    """Mean silhouette with raw Hamming distances; singletons contribute 0."""
    labels = np.asarray(labels)
    clusters = np.unique(labels)
    if clusters.size < 2:
        raise SingleCluster("silhouette needs at least two clusters")
    D = hamming_matrix(np.asarray(getattr(rows, "rows", rows))) if dist is None else dist
    D = D.astype(float)
    m = labels.size
    sums = np.stack([D[:, labels == c].sum(axis=1) for c in clusters], axis=1)
    sizes = np.array([(labels == c).sum() for c in clusters], dtype=float)
    own = np.searchsorted(clusters, labels)
    s = np.zeros(m)
    for i in range(m):
        ci = own[i]
        if sizes[ci] == 1:
            continue
        a = sums[i, ci] / (sizes[ci] - 1)
        other = np.delete(sums[i] / sizes, ci)
        b = other.min()
        denom = max(a, b)
        s[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(s.mean())


@dataclass
class SubgroupPartition:
    row_ids: np.ndarray
    assignment: np.ndarray
    k: int
    silhouettes: dict[int, float] = field(default_factory=dict)

    def to_dict(self):
        return {"k": self.k,
                "silhouette": {str(k): v for k, v in self.silhouettes.items()},
                "assignment": [{"row_id": int(r), "subgroup": int(c) + 1}
                               for r, c in zip(self.row_ids, self.assignment)]}


def select_k(rows, k_range=(2, 10), *, row_ids=None, seed: int = 0,
             gamma: float = 1.0) -> SubgroupPartition:
    """Spectral clustering for every k in range; keep the best mean silhouette.

    Ties go to the smaller k. The upper end is capped at the item count minus one.
    """
    rows = np.asarray(getattr(rows, "rows", rows))
    m = rows.shape[0]
    k_lo, k_hi = k_range
    k_hi = min(k_hi, m - 1)
    if m < 3 or k_hi < k_lo:
        raise TooFewItems(f"{m} items are too few for k in [{k_lo}, {k_range[1]}]")
    D = hamming_matrix(rows)
    best = None
    scores = {}
    for k in range(k_lo, k_hi + 1):
        labels = spectral_cluster(rows, k, seed=seed, gamma=gamma)
        if np.unique(labels).size < 2:
            continue
        s = silhouette(rows, labels, D)
        scores[k] = s
        if best is None or s > best[0] + 1e-12:
            best = (s, k, labels)
    if best is None:
        raise SingleCluster("no candidate produced two clusters")
    ids = np.arange(m) if row_ids is None else np.asarray(row_ids)
    return SubgroupPartition(ids, best[2], best[1], scores)


@dataclass
class Medoid:
    subgroup: int
    row_id: int
    size: int
    mean_distance: float
    categories: list[str] | None = None

    def to_dict(self):
        return {"subgroup": self.subgroup + 1, "medoid_row_id": self.row_id,
                "size": self.size, "mean_distance": self.mean_distance,
                "categories": self.categories}


def medoids(rows, assignment, row_ids=None, specs=None) -> list[Medoid]:
    """Member with the smallest mean Hamming distance to its co-members, per cluster."""
    rows = np.asarray(getattr(rows, "rows", rows))
    assignment = np.asarray(assignment)
    ids = np.arange(rows.shape[0]) if row_ids is None else np.asarray(row_ids)
    out = []
    for c in np.unique(assignment):
        members = np.flatnonzero(assignment == c)
        if members.size == 1:
            best, dist = members[0], 0.0
        else:
            D = hamming_matrix(rows[members]).astype(float)
            mean_d = D.sum(axis=1) / (members.size - 1)
            best_val = mean_d.min()
            cands = members[np.isclose(mean_d, best_val, rtol=0, atol=1e-12)]
            best = cands[np.argmin(ids[cands])]
            dist = float(best_val)
        cats = None
        if specs is not None:
            cats = [s.categories[v] for s, v in zip(specs, rows[best])]
        out.append(Medoid(int(c), int(ids[best]), int(members.size), dist, cats))
    return out


def medoid_table(medoid_list: list[Medoid], specs) -> list[list[str]]:
    """Variables x subgroups grid of medoid category labels (header row first)."""
    header = ["variable"] + [f"Subgroup {m.subgroup + 1}" for m in medoid_list]
    table = [header]
    for j, s in enumerate(specs):
        table.append([s.name] + [m.categories[j] for m in medoid_list])
    return table
