import numpy as np
import pytest
from hypothesis import given, strategies as st

from surveykit.errors import ConfigError, InfeasibleDomains
from surveykit.sampling.population import (PopulationConfig, SyntheticPopulation, build_frames,
                                           domain_name, generate_population, parse_domain, stratify)


def test_positive_and_correlated():
    pop = generate_population(PopulationConfig(N=100_000, seed=1))
    assert np.all(pop.x > 0) and np.all(pop.y > 0)
    assert abs(np.corrcoef(pop.x, pop.y)[0, 1] - 0.85) < 0.02


def test_truncation_redraws():
    pop = generate_population(PopulationConfig(N=2000, mu_y=0.1, sigma_y=0.2, seed=0))
    assert np.all(pop.y > 0)


def test_single_unit_and_config_errors():
    assert generate_population(PopulationConfig(N=1)).N == 1
    with pytest.raises(ConfigError):
        PopulationConfig(rho=1.0)
    with pytest.raises(ConfigError):
        PopulationConfig(sigma_x=0)


def test_stratify_sizes():
    pop = generate_population(PopulationConfig(seed=3))
    assert np.bincount(stratify(pop)).tolist() == [990, 990, 1020]
    assert stratify(np.arange(1, 10)).tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2]


def test_stratify_all_equal_warns_and_uses_index():
    with pytest.warns(UserWarning):
        s = stratify(np.ones(9))
    assert s.tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2]


def test_domain_parsing():
    assert parse_domain("1+3") == 0b101 and parse_domain((2,)) == 0b10
    assert domain_name(0b110) == "2+3"
    with pytest.raises(InfeasibleDomains):
        parse_domain("0")


def test_frames_from_domains():
    pop = generate_population(PopulationConfig(N=100, seed=0))
    f = build_frames(pop, [("1", 40), ("1+2", 10), ("2", 50)])
    assert f.frame_sizes.tolist() == [50, 60]
    assert sorted(np.bincount(f.multiplicity).tolist()) == [0, 10, 90]
    order = np.argsort(pop.x, kind="stable")
    assert np.all(f.domains[order[:40]] == 1)


def test_single_frame_and_disjoint():
    pop = generate_population(PopulationConfig(N=30, seed=0))
    assert np.all(build_frames(pop, {"1": 30}).multiplicity == 1)
    assert np.all(build_frames(pop, {"1": 10, "2": 10, "3": 10}).multiplicity == 1)


def test_frames_reproduce_reference_sizes():
    pop = generate_population(PopulationConfig(seed=0))
    f = build_frames(pop, {"1": 990, "2": 990, "3": 1020})
    assert f.frame_sizes.tolist() == [990, 990, 1020]


def test_infeasible_domains():
    pop = generate_population(PopulationConfig(N=30, seed=0))
    with pytest.raises(InfeasibleDomains):
        build_frames(pop, {"1": 10, "2": 10})
    with pytest.raises(InfeasibleDomains):
        build_frames(pop, {"1": 30, "2": 0})


@given(st.lists(st.integers(0, 20), min_size=7, max_size=7), st.sampled_from(["x", "random"]))
def test_frame_partition_invariants(sizes, order):
    if sum(sizes) == 0:
        return
    pop = generate_population(PopulationConfig(N=sum(sizes), seed=1))
    doms = [(m, s) for m, s in zip(["1", "2", "1+2", "3", "1+3", "2+3", "1+2+3"], sizes)]
    try:
        f = build_frames(pop, doms, n_frames=3, order=order, seed=2)
    except InfeasibleDomains:
        return
    M = f.membership
    assert np.all(M.any(axis=1))                         # union is the population
    assert np.array_equal(f.multiplicity, M.sum(axis=1))
    assert np.all(f.multiplicity >= 1)
