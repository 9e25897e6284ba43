"""Mean estimators: stratified (STS), simple multiplicity (SM) and pseudo-ML multi-frame (PML)."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import (EmptyDomainSampleWarning, EmptyStratumSample, NonConvergence,
                      ZeroInclusionProbability)

PML_TOL = 1e-10
PML_MAX_ITER = 200


@dataclass(frozen=True)
class FrameSample:
    """Units drawn from one frame with their inclusion probabilities in that frame."""
    frame: int
    units: np.ndarray
    pi: np.ndarray


def estimate_sts(y_by_stratum, pop_sizes) -> float:
    """sum_q (N_q / N) * mean(y in stratum sample q)."""
    N_q = np.asarray(pop_sizes, dtype=float)
    total = 0.0
    for q, ys in enumerate(y_by_stratum):
        ys = np.asarray(ys, dtype=float)
        if ys.size == 0:
            raise EmptyStratumSample(f"stratum {q} has no sampled units")
        total += N_q[q] * ys.mean()
    return float(total / N_q.sum())


def _check_pi(pi):
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0):
        raise ZeroInclusionProbability("inclusion probabilities must be positive")
    return pi


def estimate_sm(samples, y, multiplicity, N: int) -> float:
    """Horvitz-Thompson total over all frames with y divided by multiplicity, over N."""
    y = np.asarray(y, dtype=float)
    m = np.asarray(multiplicity, dtype=float)
    total = 0.0
    for s in samples:
        pi = _check_pi(s.pi)
        total += np.sum(y[s.units] / (m[s.units] * pi))
    return float(total / N)


def _incidence(masks, n_frames) -> np.ndarray:
    q = np.arange(n_frames)
    return ((np.asarray(masks)[:, None] >> q[None, :]) & 1).astype(float)


def solve_domain_sizes(a, incidence, frame_sizes, lam0=None, *, tol: float = PML_TOL,
                       max_iter: int = PML_MAX_ITER) -> np.ndarray:
    """Maximise sum_d a_d log N_d subject to sum_{d in q} N_d = N_q for every frame q.

    Solved through the convex dual in the frame multipliers lambda, with
    N_d = a_d / sum_{q containing d} lambda_q, by damped Newton steps.
    """
    a = np.asarray(a, dtype=float)
    E = np.asarray(incidence, dtype=float)          # D x Q
    Nq = np.asarray(frame_sizes, dtype=float)
    lam = np.asarray(lam0, dtype=float).copy() if lam0 is not None else a @ E / Nq
    lam = np.where(lam > 0, lam, 1.0 / Nq)

    def dual(l):
        Lam = E @ l
        if np.any(Lam[a > 0] <= 0):
            return np.inf
        pos = a > 0
        return float(np.sum(a[pos] * np.log(a[pos] / Lam[pos])) - a.sum() + l @ Nq)

    f = dual(lam)
    for _ in range(max_iter):
        Lam = E @ lam
        Nd = np.divide(a, Lam, out=np.zeros_like(a), where=a > 0)
        grad = Nq - E.T @ Nd
        if np.max(np.abs(grad) / Nq) < 1e-3 * tol:
            return Nd
        H = E.T @ (E * np.divide(a, Lam ** 2, out=np.zeros_like(a), where=a > 0)[:, None])
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        t = 1.0
        while t > 1e-12:
            cand = lam - t * step
            fc = dual(cand)
            if fc <= f - 1e-4 * t * (grad @ step):
                break
            if np.isfinite(fc) and abs(fc - f) <= 1e-14 * max(1.0, abs(f)):
                break
            t *= 0.5
        else:
            break
        lam, f = cand, fc
    Lam = E @ lam
    Nd = np.divide(a, Lam, out=np.zeros_like(a), where=a > 0)
    if np.max(np.abs(Nq - E.T @ Nd) / Nq) < tol:
        return Nd
    raise NonConvergence("domain-size pseudo-likelihood did not converge")


def estimate_pml(samples, y, domains, frame_sizes, return_domains: bool = False):
    """Pseudo-maximum-likelihood multi-frame estimate of the population mean.

    ``domains`` holds each unit's frame-membership bitmask. Frame-level HT domain
    counts and totals are pooled with weights n_q / N_q; the pooled counts fix
    the domain sizes through :func:`solve_domain_sizes`, and the estimate is the
    mean of the pooled domain means weighted by the fitted domain sizes.
    """
    y = np.asarray(y, dtype=float)
    domains = np.asarray(domains)
    Nq = np.asarray(frame_sizes, dtype=float)
    Q = Nq.size
    masks = np.arange(1, 1 << Q)
    E = _incidence(masks, Q)
    a = np.zeros(masks.size)
    b = np.zeros(masks.size)
    for s in samples:
        pi = _check_pi(s.pi)
        d_idx = domains[s.units] - 1                 # mask -> row of E
        scale = s.units.size / Nq[s.frame]
        a += scale * np.bincount(d_idx, weights=1.0 / pi, minlength=masks.size)
        b += scale * np.bincount(d_idx, weights=y[s.units] / pi, minlength=masks.size)
    possible = np.zeros(masks.size, dtype=bool)
    possible[np.unique(domains) - 1] = True
    if np.any(possible & (a == 0)):
        warnings.warn("a populated domain has no sampled units; it is dropped",
                      EmptyDomainSampleWarning, stacklevel=2)
    Nd = solve_domain_sizes(a, E, Nq)
    ybar = np.divide(b, a, out=np.zeros_like(b), where=a > 0)
    est = float(Nd @ ybar / Nd.sum())
    if return_domains:
        return est, dict(zip((int(m) for m in masks), Nd))
    return est
