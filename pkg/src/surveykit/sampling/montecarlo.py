"""Monte Carlo comparison of stratified and multi-frame sampling strategies."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import UnreliableMetricWarning
from .allocation import AllocationPlan, allocate
from .designs import sampford_sample, srs_sample
from .estimators import FrameSample, estimate_pml, estimate_sm, estimate_sts
from .population import SyntheticPopulation, build_frames, domain_name, generate_population, stratify
from .scenario import Scenario

BOOTSTRAP_REPS = 1000


@dataclass
class Prepared:
    population: SyntheticPopulation
    strata_units: list
    frame_units: list
    size_measures: list
    plans: dict           # scheme -> {"strata": AllocationPlan, "frames": AllocationPlan}


def frame_sigmas(pop: SyntheticPopulation) -> np.ndarray:
    """Std. dev. of y / multiplicity within each frame, from the full population."""
    ym = pop.y / pop.multiplicity
    return np.array([np.std(ym[pop.frame_units(q)], ddof=1) if pop.frame_units(q).size > 1 else 0.0
                     for q in range(pop.n_frames)])


def stratum_sigmas(pop: SyntheticPopulation) -> np.ndarray:
    Q = int(pop.strata.max()) + 1
    return np.array([np.std(pop.y[pop.strata == q], ddof=1) if np.sum(pop.strata == q) > 1 else 0.0
                     for q in range(Q)])


def prepare(sc: Scenario, population: SyntheticPopulation | None = None) -> Prepared:
    pop = generate_population(sc.population) if population is None else population
    if pop.strata is None:
        pop = pop.with_(strata=stratify(pop, sc.strata_cuts))
    if pop.domains is None:
        pop = build_frames(pop, sc.domains, order=sc.frame_order, seed=sc.population.seed)
    strata_units = [np.flatnonzero(pop.strata == q) for q in range(int(pop.strata.max()) + 1)]
    frame_units = [pop.frame_units(q) for q in range(pop.n_frames)]
    if sc.size_measure == "x":
        sizes = [pop.x[u] for u in frame_units]
    else:
        sizes = [None] * len(frame_units)
    plans = {}
    for scheme in sc.schemes:
        kw = dict(n=sc.n, budget=sc.budget, unit_costs=sc.unit_costs, fixed_cost=sc.fixed_cost)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UnreliableMetricWarning)
            plans[scheme] = {
                "strata": allocate(scheme, pop_sizes=[u.size for u in strata_units],
                                   sigmas=stratum_sigmas(pop), **kw),
                "frames": allocate(scheme, pop_sizes=[u.size for u in frame_units],
                                   sigmas=frame_sigmas(pop), **kw),
            }
    return Prepared(pop, strata_units, frame_units, sizes, plans)


def replicate(prep: Prepared, scheme: str, rng, estimators=("STS", "SM", "PML")) -> dict:
    """One replication: an STS sample and an MF sample, then the requested estimates."""
    pop = prep.population
    plan = prep.plans[scheme]
    out = {}
    if "STS" in estimators:
        ys = [pop.y[srs_sample(u, n, rng)] for u, n in zip(prep.strata_units, plan["strata"].sizes)]
        out["STS"] = estimate_sts(ys, [u.size for u in prep.strata_units])
    if "SM" in estimators or "PML" in estimators:
        samples = []
        for q, (u, n, s) in enumerate(zip(prep.frame_units, plan["frames"].sizes, prep.size_measures)):
            units, pi = sampford_sample(u, n, rng, s)
            samples.append(FrameSample(q, units, pi))
        if "SM" in estimators:
            out["SM"] = estimate_sm(samples, pop.y, pop.multiplicity, pop.N)
        if "PML" in estimators:
            out["PML"] = estimate_pml(samples, pop.y, pop.domains, pop.frame_sizes)
    return out


def replication_rng(seed: int, scheme_index: int, r: int):
    return np.random.default_rng([seed, scheme_index, r])


@dataclass
class EstimatorRunResult:
    estimator: str
    allocation: str
    estimates: np.ndarray
    mu: float
    mse: float
    rb: float
    p5: float
    p95: float
    mse_p5: float
    mse_p95: float

    @property
    def replications(self) -> int:
        return self.estimates.size

    @property
    def relative_errors(self) -> np.ndarray:
        return (self.estimates - self.mu) / self.mu if self.mu != 0 else self.estimates - self.mu

    def to_dict(self):
        return {"allocation": self.allocation, "estimator": self.estimator,
                "replications": self.replications, "mse": self.mse, "rb": self.rb,
                "mse_p5": self.mse_p5, "mse_p95": self.mse_p95,
                "estimate_mean": float(np.mean(self.estimates)),
                "estimate_p5": self.p5, "estimate_p95": self.p95,
                "unreliable": self.replications < 2}


def summarize(estimator, allocation, estimates, mu, seed: int = 0) -> EstimatorRunResult:
    est = np.asarray(estimates, dtype=float)
    err = est - mu
    sq = err * err
    mse = math.fsum(sq) / est.size
    rb = math.fsum(err / mu) / est.size if mu != 0 else 0.0
    p5, p95 = (float(v) for v in np.percentile(est, [5, 95]))
    boot_rng = np.random.default_rng([seed, 0xB00])
    idx = boot_rng.integers(0, est.size, size=(BOOTSTRAP_REPS, est.size))
    mse_p5, mse_p95 = (float(v) for v in np.percentile(sq[idx].mean(axis=1), [5, 95]))
    return EstimatorRunResult(estimator, allocation, est, float(mu), float(mse), float(rb),
                              p5, p95, mse_p5, mse_p95)


@dataclass
class SimulationResult:
    scenario: Scenario
    prepared: Prepared
    results: list = field(default_factory=list)

    @property
    def mu(self) -> float:
        return self.prepared.population.mean_y

    def get(self, allocation, estimator) -> EstimatorRunResult:
        for r in self.results:
            if r.allocation == allocation and r.estimator == estimator:
                return r
        raise KeyError((allocation, estimator))

    def summary(self) -> dict:
        pop = self.prepared.population
        return {"mu_y": self.mu, "N": pop.N,
                "strata_sizes": [int(v) for v in pop.stratum_sizes],
                "frame_sizes": [int(v) for v in pop.frame_sizes],
                "domain_sizes": {domain_name(int(m)): int(c) for m, c in
                                 zip(*np.unique(pop.domains, return_counts=True))},
                "allocations": {s: {k: p.to_dict() for k, p in v.items()}
                                for s, v in self.prepared.plans.items()},
                "results": [r.to_dict() for r in self.results]}

    def replication_rows(self):
        """Header and rows: allocation, replication, one column per estimator."""
        ests = list(self.scenario.estimators)
        rows = []
        for scheme in self.scenario.schemes:
            cols = [self.get(scheme, e).estimates for e in ests]
            for r in range(cols[0].size):
                rows.append([scheme, r + 1] + [repr(float(c[r])) for c in cols])
        return ["allocation", "replication"] + ests, rows

    def trace_rows(self):
        """Running mean with running P5/P95 of the estimates after each replication."""
        rows = []
        for res in self.results:
            est = res.estimates
            running = np.cumsum(est) / np.arange(1, est.size + 1)
            for m in range(est.size):
                lo, hi = np.percentile(est[: m + 1], [5, 95])
                rows.append([res.allocation, res.estimator, m + 1, repr(float(running[m])),
                             repr(float(lo)), repr(float(hi)), repr(self.mu)])
        return ["allocation", "estimator", "m", "running_mean", "p5", "p95", "mu_y"], rows

    def rb_rows(self):
        rows = []
        for res in self.results:
            for m, v in enumerate(res.relative_errors):
                rows.append([res.allocation, res.estimator, m + 1, repr(float(v))])
        return ["allocation", "estimator", "replication", "relative_error"], rows

    def table(self) -> str:
        lines = [f"{'allocation':<14}{'estimator':<10}{'MSE':>12}{'P5':>12}{'P95':>12}{'RB':>12}"]
        for r in self.results:
            lines.append(f"{r.allocation:<14}{r.estimator:<10}{r.mse:>12.4e}{r.mse_p5:>12.4e}"
                         f"{r.mse_p95:>12.4e}{r.rb:>12.2e}")
        return "\n".join(lines)


def run_monte_carlo(sc: Scenario, *, replications: int | None = None, seed: int | None = None,
                    population: SyntheticPopulation | None = None, workers: int = 1,
                    prepared: Prepared | None = None) -> SimulationResult:
    """Run M replications per allocation scheme; replication r of scheme s is
    seeded from (seed, s, r) so results do not depend on ``workers``."""
    M = sc.replications if replications is None else replications
    seed = sc.seed if seed is None else seed
    if M < 2:
        warnings.warn("fewer than two replications; MC metrics are unreliable",
                      UnreliableMetricWarning, stacklevel=2)
    prep = prepare(sc, population) if prepared is None else prepared
    mu = prep.population.mean_y
    out = SimulationResult(sc, prep)
    for si, scheme in enumerate(sc.schemes):
        def task(r, si=si, scheme=scheme):
            return replicate(prep, scheme, replication_rng(seed, si, r), sc.estimators)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                reps = list(pool.map(task, range(M)))
        else:
            reps = [task(r) for r in range(M)]
        for e in sc.estimators:
            out.results.append(summarize(e, scheme, [d[e] for d in reps], mu, seed))
    return out
