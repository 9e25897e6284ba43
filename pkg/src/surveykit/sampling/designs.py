"""Within-stratum SRS and within-frame Sampford selection."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidSizeMeasure, OversizedSample, RetryExhausted

MAX_RETRIES = 1_000_000


def srs_sample(units, n: int, rng) -> np.ndarray:
    """Simple random sample without replacement, returned sorted."""
    units = np.asarray(units)
    if n < 1:
        raise OversizedSample(f"sample size must be >= 1, got {n}")
    if n > units.size:
        raise OversizedSample(f"sample size {n} exceeds {units.size} units")
    return np.sort(rng.choice(units, size=n, replace=False))


def inclusion_targets(n: int, size_measure) -> np.ndarray:
    """pi_k = n s_k / sum(s), with units reaching 1 fixed at 1 and the rest rescaled."""
    s = np.asarray(size_measure, dtype=float)
    if s.ndim != 1 or s.size == 0 or not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise InvalidSizeMeasure("size measure must be finite and strictly positive")
    if not 1 <= n <= s.size:
        raise OversizedSample(f"sample size {n} not in [1, {s.size}]")
    pi = np.zeros(s.size)
    certain = np.zeros(s.size, dtype=bool)
    while True:
        left = n - certain.sum()
        free = ~certain
        pi[free] = left * s[free] / s[free].sum() if left > 0 else 0.0
        pi[certain] = 1.0
        newly = free & (pi >= 1.0 - 1e-12)
        if not newly.any():
            return pi
        certain |= newly


def _sampford_batch(pi: np.ndarray, n: int, rng, batch: int) -> np.ndarray:
    """All accepted Sampford samples among ``batch`` candidates, as a boolean matrix.

    Candidates are Poisson samples with probabilities pi; one of size n is kept
    with probability (n - sum of its pi) / n. Each kept row follows
    p(s) proportional to (n - sum_s pi) prod_s pi / (1 - pi), whose first-order
    inclusion probabilities are exactly pi (all 0 < pi < 1, sum(pi) = n).
    """
    hits = rng.random((batch, pi.size)) < pi
    accept_u = rng.random(batch)
    ok = hits.sum(axis=1) == n
    ok &= accept_u * n < n - hits @ pi
    return hits[ok]


def _sampford_core(pi: np.ndarray, n: int, rng, batch: int) -> np.ndarray:
    """Positions of one Sampford sample."""
    tries = 0
    while tries < MAX_RETRIES:
        kept = _sampford_batch(pi, n, rng, batch)
        if kept.shape[0]:
            return np.flatnonzero(kept[0])
        tries += batch
    raise RetryExhausted(f"no Sampford sample accepted in {MAX_RETRIES} attempts")


def sampford_samples(units, n: int, rng, size_measure, draws: int) -> tuple[np.ndarray, np.ndarray]:
    """``draws`` independent Sampford samples as a (draws, n) array of unit ids, plus pi
    for every unit. Used for checking inclusion frequencies in bulk."""
    units = np.asarray(units)
    pi = inclusion_targets(n, size_measure)
    certain = pi >= 1.0
    rest = np.flatnonzero(~certain)
    n_rest = n - int(certain.sum())
    out = np.zeros((draws, units.size), dtype=bool)
    out[:, certain] = True
    if n_rest > 0:
        got, tries = 0, 0
        while got < draws:
            if tries >= MAX_RETRIES * max(1, draws):
                raise RetryExhausted("Sampford acceptance rate too low")
            kept = _sampford_batch(pi[rest], n_rest, rng, 8192)
            take = kept[: draws - got]
            out[got: got + take.shape[0], rest] = take
            got += take.shape[0]
            tries += 8192
    ids = np.nonzero(out)[1].reshape(draws, n)
    return units[ids], pi


def sampford_sample(units, n: int, rng, size_measure=None) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-size unequal-probability sample; returns (sorted unit ids, their pi).

    Without a size measure every unit gets pi = n / N_q, and the design then
    coincides with simple random sampling, which is drawn directly.
    """
    units = np.asarray(units)
    if n < 1 or n > units.size:
        raise OversizedSample(f"sample size {n} not in [1, {units.size}]")
    if size_measure is None:
        pick = srs_sample(np.arange(units.size), n, rng)
        return units[pick], np.full(n, n / units.size)
    pi = inclusion_targets(n, size_measure)
    certain = pi >= 1.0
    rest = np.flatnonzero(~certain)
    n_rest = n - int(certain.sum())
    chosen = np.flatnonzero(certain)
    if n_rest > 0:
        p = pi[rest]
        if np.allclose(p, p[0], rtol=0, atol=1e-15):
            sub = np.sort(rng.choice(rest.size, size=n_rest, replace=False))
        else:
            # keep expected attempts per batch near a few dozen Poisson draws
            batch = int(min(256, max(8, 4 * np.sqrt(np.sum(p * (1 - p))))))
            sub = _sampford_core(p, n_rest, rng, batch)
        chosen = np.sort(np.concatenate([chosen, rest[sub]]))
    return units[chosen], pi[chosen]
