"""Simulation scenario: TOML file <-> nested dataclasses.

Layout (every key shown is required unless marked optional)::

    [population]
    N = 3000
    mu_x = 4.0
    mu_y = 1.0
    sigma_x = 0.3
    sigma_y = 0.2
    rho = 0.85
    seed = 2024

    [strata]                 # optional section
    cuts = [0.33, 0.66]

    [frames]
    order = "x"              # optional: "x" or "random"
    [frames.domains]         # ordered; keys are '+'-joined frame numbers
    "1" = 960
    "1+2" = 30

    [allocation]
    schemes = ["proportional", "optimal_cost"]
    n = 600
    budget = 6000.0
    unit_costs = [9.5, 10.0, 10.5]
    fixed_cost = 0.0         # optional

    [design]                 # optional section
    size_measure = "uniform" # or "x"

    [simulation]
    replications = 2500
    seed = 1
    estimators = ["STS", "SM", "PML"]   # optional
"""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError
from .population import PopulationConfig

ESTIMATORS = ("STS", "SM", "PML")
SCHEMES = ("proportional", "optimal_cost")

# Units are laid out along increasing x into the domains below; overlaps sit
# at the two frame borders so that frames act much like x-strata.
DEFAULT_DOMAINS = (("1", 960), ("1+2", 30), ("2", 915), ("2+3", 45), ("3", 1050))


@dataclass(frozen=True)
class Scenario:
    population: PopulationConfig = PopulationConfig(seed=2024)
    domains: tuple = DEFAULT_DOMAINS
    frame_order: str = "x"
    strata_cuts: tuple = (0.33, 0.66)
    schemes: tuple = SCHEMES
    n: int = 600
    budget: float = 6000.0
    unit_costs: tuple = (9.5, 10.0, 10.5)
    fixed_cost: float = 0.0
    size_measure: str = "uniform"
    replications: int = 2500
    seed: int = 1
    estimators: tuple = ESTIMATORS

    def __post_init__(self):
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown allocation scheme {s!r}", field="allocation.schemes")
        for e in self.estimators:
            if e not in ESTIMATORS:
                raise ConfigError(f"unknown estimator {e!r}", field="simulation.estimators")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1", field="simulation.replications")
        if self.size_measure not in ("uniform", "x"):
            raise ConfigError(f"unknown size measure {self.size_measure!r}",
                              field="design.size_measure")
        if len(self.unit_costs) != len(self.strata_cuts) + 1:
            raise ConfigError("one unit cost per stratum/frame is needed",
                              field="allocation.unit_costs")

    def with_(self, **kw) -> "Scenario":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        return Scenario(**d)

    def to_dict(self):
        return {"population": asdict(self.population),
                "strata": {"cuts": list(self.strata_cuts)},
                "frames": {"order": self.frame_order, "domains": dict(self.domains)},
                "allocation": {"schemes": list(self.schemes), "n": self.n,
                               "budget": self.budget, "unit_costs": list(self.unit_costs),
                               "fixed_cost": self.fixed_cost},
                "design": {"size_measure": self.size_measure},
                "simulation": {"replications": self.replications, "seed": self.seed,
                               "estimators": list(self.estimators)}}


def default_scenario(**overrides) -> Scenario:
    return Scenario().with_(**overrides) if overrides else Scenario()


def _need(table, key, path):
    if not isinstance(table, dict) or key not in table:
        raise ConfigError(f"missing required field '{path}'", field=path)
    return table[key]


def scenario_from_dict(doc: dict) -> Scenario:
    pop = _need(doc, "population", "population")
    pcfg = PopulationConfig(**{k: _need(pop, k, f"population.{k}") for k in
                               ("N", "mu_x", "mu_y", "sigma_x", "sigma_y", "rho", "seed")})
    frames = _need(doc, "frames", "frames")
    domains = tuple((str(k), int(v)) for k, v in _need(frames, "domains", "frames.domains").items())
    alloc = _need(doc, "allocation", "allocation")
    sim = _need(doc, "simulation", "simulation")
    return Scenario(
        population=pcfg,
        domains=domains,
        frame_order=frames.get("order", "x"),
        strata_cuts=tuple(doc.get("strata", {}).get("cuts", (0.33, 0.66))),
        schemes=tuple(_need(alloc, "schemes", "allocation.schemes")),
        n=int(_need(alloc, "n", "allocation.n")),
        budget=float(_need(alloc, "budget", "allocation.budget")),
        unit_costs=tuple(float(c) for c in _need(alloc, "unit_costs", "allocation.unit_costs")),
        fixed_cost=float(alloc.get("fixed_cost", 0.0)),
        size_measure=doc.get("design", {}).get("size_measure", "uniform"),
        replications=int(_need(sim, "replications", "simulation.replications")),
        seed=int(_need(sim, "seed", "simulation.seed")),
        estimators=tuple(sim.get("estimators", ESTIMATORS)),
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse scenario: {exc}") from exc
    return scenario_from_dict(doc)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return repr(v)


def dump_scenario(sc: Scenario) -> str:
    d = sc.to_dict()
    lines = []
    for section in ("population", "strata", "frames", "allocation", "design", "simulation"):
        lines.append(f"[{section}]")
        sub = {}
        for k, v in d[section].items():
            if isinstance(v, dict):
                sub[k] = v
            else:
                lines.append(f"{k} = {_toml_value(v)}")
        lines.append("")
        for k, v in sub.items():
            lines.append(f"[{section}.{k}]")
            lines.extend(f'"{kk}" = {_toml_value(vv)}' for kk, vv in v.items())
            lines.append("")
    return "\n".join(lines)
