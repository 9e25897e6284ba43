"""Synthetic bivariate population, percentile strata and overlapping frames."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ConfigError, InfeasibleDomains


@dataclass(frozen=True)
class PopulationConfig:
    N: int = 3000
    mu_x: float = 4.0
    mu_y: float = 1.0
    sigma_x: float = 0.3
    sigma_y: float = 0.2
    rho: float = 0.85
    seed: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if not (self.sigma_x > 0 and self.sigma_y > 0):
            raise ConfigError("standard deviations must be positive")
        if not abs(self.rho) < 1:
            raise ConfigError("|rho| must be < 1")


@dataclass(frozen=True, eq=False)
class SyntheticPopulation:
    y: np.ndarray
    x: np.ndarray
    strata: np.ndarray | None = None
    domains: np.ndarray | None = None    # bitmask of frames per unit, bit q = frame q
    n_frames: int = 0

    @property
    def N(self) -> int:
        return self.y.size

    @property
    def mean_y(self) -> float:
        return float(np.mean(self.y))

    @property
    def membership(self) -> np.ndarray:
        """N x Q boolean frame-membership matrix."""
        q = np.arange(self.n_frames)
        return ((self.domains[:, None] >> q[None, :]) & 1).astype(bool)

    @property
    def multiplicity(self) -> np.ndarray:
        return self.membership.sum(axis=1)

    def frame_units(self, q: int) -> np.ndarray:
        return np.flatnonzero((self.domains >> q) & 1)

    @property
    def frame_sizes(self) -> np.ndarray:
        return self.membership.sum(axis=0)

    @property
    def stratum_sizes(self) -> np.ndarray:
        return np.bincount(self.strata)

    def with_(self, **kw) -> "SyntheticPopulation":
        return replace(self, **kw)


def generate_population(cfg: PopulationConfig = PopulationConfig()) -> SyntheticPopulation:
    """Bivariate Gaussian pairs truncated to the positive quadrant by redrawing."""
    rng = np.random.default_rng(cfg.seed)
    cov = np.array([[cfg.sigma_y ** 2, cfg.rho * cfg.sigma_x * cfg.sigma_y],
                    [cfg.rho * cfg.sigma_x * cfg.sigma_y, cfg.sigma_x ** 2]])
    chol = np.linalg.cholesky(cov)
    mean = np.array([cfg.mu_y, cfg.mu_x])
    out = np.empty((cfg.N, 2))
    filled = 0
    while filled < cfg.N:
        need = cfg.N - filled
        draw = mean + rng.standard_normal((need, 2)) @ chol.T
        ok = draw[np.all(draw > 0, axis=1)]
        out[filled:filled + ok.shape[0]] = ok
        filled += ok.shape[0]
    return SyntheticPopulation(out[:, 0].copy(), out[:, 1].copy())


def stratify(pop_or_x, cuts=(0.33, 0.66)) -> np.ndarray:
    """Stratum ids from rank cut points of x (33rd and 66th percentiles by default).

    Units are ranked by x with ties kept in index order, so the first
    round(0.33 N) ranks form stratum 0, and so on.
    """
    x = np.asarray(getattr(pop_or_x, "x", pop_or_x), dtype=float)
    N = x.size
    if N and np.ptp(x) == 0:
        warnings.warn("all x equal; strata follow index order", UserWarning, stacklevel=2)
    order = np.argsort(x, kind="stable")
    bounds = [int(round(c * N)) for c in cuts]
    strata = np.empty(N, dtype=np.int64)
    rank_stratum = np.searchsorted(np.array(bounds), np.arange(N), side="right")
    strata[order] = rank_stratum
    return strata


def parse_domain(key) -> int:
    """'1+2' or (1, 2) -> bitmask over 1-based frame numbers."""
    if isinstance(key, str):
        parts = [p for p in key.replace(",", "+").split("+") if p.strip()]
        frames = [int(p) for p in parts]
    elif isinstance(key, (int, np.integer)):
        frames = [int(key)]
    else:
        frames = [int(v) for v in key]
    if not frames or min(frames) < 1:
        raise InfeasibleDomains(f"domain {key!r} must name frames numbered from 1")
    mask = 0
    for f in frames:
        mask |= 1 << (f - 1)
    return mask


def domain_name(mask: int) -> str:
    return "+".join(str(q + 1) for q in range(mask.bit_length()) if (mask >> q) & 1)


def build_frames(pop: SyntheticPopulation, domain_sizes, *, n_frames: int | None = None,
                 order: str = "x", seed: int = 0) -> SyntheticPopulation:
    """Allocate units sequentially to disjoint domains and derive frame membership.

    ``domain_sizes`` is an ordered sequence of (domain, size) pairs or a dict;
    a domain is a set of 1-based frame numbers ('1+2'). Units are taken in
    increasing x (``order='x'``) or in a seeded random order (``'random'``).
    """
    items = list(domain_sizes.items()) if isinstance(domain_sizes, dict) else list(domain_sizes)
    masks = [parse_domain(k) for k, _ in items]
    sizes = [int(v) for _, v in items]
    if len(set(masks)) != len(masks):
        raise InfeasibleDomains("each domain may appear once")
    if any(s < 0 for s in sizes) or sum(sizes) != pop.N:
        raise InfeasibleDomains(f"domain sizes sum to {sum(sizes)}, population has {pop.N}")
    Q = max(m.bit_length() for m in masks) if n_frames is None else n_frames
    if any(m >= (1 << Q) for m in masks):
        raise InfeasibleDomains("domain refers to a frame beyond the frame count")
    if order == "x":
        units = np.argsort(pop.x, kind="stable")
    elif order == "random":
        units = np.random.default_rng(seed).permutation(pop.N)
    else:
        raise ConfigError(f"unknown unit order {order!r}")
    domains = np.empty(pop.N, dtype=np.int64)
    pos = 0
    for mask, size in zip(masks, sizes):
        domains[units[pos:pos + size]] = mask
        pos += size
    out = pop.with_(domains=domains, n_frames=Q)
    if np.any(out.frame_sizes == 0):
        raise InfeasibleDomains("every frame must contain at least one unit")
    return out
