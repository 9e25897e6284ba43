"""Proportional and cost-optimal allocation of a sample across strata or frames."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import BudgetInfeasible, ConfigError, ZeroVarianceWarning


@dataclass(frozen=True)
class AllocationPlan:
    scheme: str
    sizes: tuple[int, ...]
    population_sizes: tuple[int, ...]
    unit_costs: tuple[float, ...] | None = None
    fixed_cost: float = 0.0
    budget: float | None = None

    @property
    def n(self) -> int:
        return int(sum(self.sizes))

    @property
    def total_cost(self) -> float | None:
        if self.unit_costs is None:
            return None
        return self.fixed_cost + float(np.dot(self.sizes, self.unit_costs))

    def to_dict(self):
        return {"scheme": self.scheme, "sizes": list(self.sizes),
                "population_sizes": list(self.population_sizes),
                "shares": [s / self.n for s in self.sizes],
                "unit_costs": None if self.unit_costs is None else list(self.unit_costs),
                "fixed_cost": self.fixed_cost, "budget": self.budget,
                "total_cost": self.total_cost}


def largest_remainder(target, total: int) -> np.ndarray:
    """Integer vector summing to ``total`` closest to ``target`` (Hamilton rounding)."""
    target = np.asarray(target, dtype=float)
    base = np.floor(target).astype(np.int64)
    short = int(total - base.sum())
    if short > 0:
        frac = target - base
        # stable: ties favour the earlier position
        order = np.argsort(-frac, kind="stable")
        base[order[:short]] += 1
    return base


def _clamp(sizes, caps) -> np.ndarray:
    return np.clip(sizes, 1, caps)


def proportional(n: int, pop_sizes) -> AllocationPlan:
    N = np.asarray(pop_sizes, dtype=np.int64)
    if n < len(N) or n > N.sum():
        raise ConfigError(f"cannot allocate n={n} over sizes {list(N)}")
    sizes = _clamp(largest_remainder(n * N / N.sum(), n), N)
    target = n * N / N.sum()
    # clamping can move the total; take from / give to the groups furthest from target
    while sizes.sum() > n:
        q = int(np.argmax(np.where(sizes > 1, sizes - target, -np.inf)))
        sizes[q] -= 1
    while sizes.sum() < n:
        q = int(np.argmax(np.where(sizes < N, target - sizes, -np.inf)))
        sizes[q] += 1
    return AllocationPlan("proportional", tuple(int(v) for v in sizes), tuple(int(v) for v in N))


def optimal_cost(budget: float, pop_sizes, sigmas, unit_costs, fixed_cost: float = 0.0) -> AllocationPlan:
    """n_q proportional to N_q sigma_q / sqrt(c_q), scaled to spend the budget.

    Fractional sizes are floored, then units are added in largest-remainder
    order while the budget allows, then clamped to [1, N_q].
    """
    N = np.asarray(pop_sizes, dtype=float)
    s = np.asarray(sigmas, dtype=float)
    c = np.asarray(unit_costs, dtype=float)
    if not (N.shape == s.shape == c.shape) or np.any(c <= 0) or np.any(s < 0):
        raise ConfigError("sizes, sigmas and positive costs must align")
    avail = budget - fixed_cost
    if avail < c.sum():
        raise BudgetInfeasible(f"budget {budget} cannot buy one unit per group")
    if not np.any(s > 0):
        warnings.warn("all sigmas are zero; using proportional shares", ZeroVarianceWarning,
                      stacklevel=2)
        s = np.ones_like(s)
    target = avail * (N * s / np.sqrt(c)) / np.sum(N * s * np.sqrt(c))
    sizes = np.floor(target).astype(np.int64)
    frac = target - sizes
    for q in np.argsort(-frac, kind="stable"):
        if fixed_cost + np.dot(sizes, c) + c[q] <= budget + 1e-9 and frac[q] > 0:
            sizes[q] += 1
    sizes = _clamp(sizes, N.astype(np.int64))
    while fixed_cost + np.dot(sizes, c) > budget + 1e-9:
        # clamping up to 1 can overshoot; trim the most expensive surplus
        q = int(np.argmax(np.where(sizes > 1, c, -np.inf)))
        sizes[q] -= 1
    return AllocationPlan("optimal_cost", tuple(int(v) for v in sizes), tuple(int(v) for v in N),
                          tuple(float(v) for v in c), float(fixed_cost), float(budget))


def allocate(scheme: str, *, pop_sizes, n: int | None = None, budget: float | None = None,
             sigmas=None, unit_costs=None, fixed_cost: float = 0.0) -> AllocationPlan:
    if scheme == "proportional":
        if n is None:
            raise ConfigError("proportional allocation needs n")
        plan = proportional(n, pop_sizes)
        if unit_costs is not None:
            plan = AllocationPlan(plan.scheme, plan.sizes, plan.population_sizes,
                                  tuple(float(v) for v in unit_costs), float(fixed_cost), budget)
        return plan
    if scheme == "optimal_cost":
        if budget is None or sigmas is None or unit_costs is None:
            raise ConfigError("optimal_cost allocation needs budget, sigmas and unit_costs")
        return optimal_cost(budget, pop_sizes, sigmas, unit_costs, fixed_cost)
    raise ConfigError(f"unknown allocation scheme {scheme!r}")
