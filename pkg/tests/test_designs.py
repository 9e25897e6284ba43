import numpy as np
import pytest

from surveykit.errors import InvalidSizeMeasure, OversizedSample
from surveykit.sampling.designs import inclusion_targets, sampford_sample, sampford_samples, srs_sample

from oracles import sampford_exact


def test_srs_basics(rng):
    assert srs_sample(np.arange(5), 5, rng).tolist() == [0, 1, 2, 3, 4]
    with pytest.raises(OversizedSample):
        srs_sample(np.arange(5), 0, rng)
    with pytest.raises(OversizedSample):
        srs_sample(np.arange(5), 6, rng)


def test_srs_inclusion_frequencies(rng):
    hits = np.zeros(20)
    R = 10_000
    for _ in range(R):
        hits[srs_sample(np.arange(20), 5, rng)] += 1
    p = 0.25
    # 4 sigma: twenty simultaneous checks
    assert np.all(np.abs(hits / R - p) <= 4 * np.sqrt(p * (1 - p) / R))


def test_targets_and_certainty():
    assert np.allclose(inclusion_targets(2, [1, 1, 1, 1]), 0.5)
    pi = inclusion_targets(2, [100, 1, 1, 1])
    assert pi[0] == 1.0 and np.allclose(pi[1:], 1 / 3)
    with pytest.raises(InvalidSizeMeasure):
        inclusion_targets(2, [1, 0, 1])


def test_enumeration_oracle_matches_target():
    pi = np.array([0.1, 0.3, 0.5, 0.4, 0.45, 0.25])
    assert np.allclose(sampford_exact(pi, 2), pi)


def test_fixed_size_distinct_units(rng):
    for _ in range(50):
        units, pi = sampford_sample(np.arange(100, 110), 4, rng, rng.uniform(1, 5, 10))
        assert units.size == 4 and np.unique(units).size == 4
        assert np.all((units >= 100) & (units < 110)) and np.all(pi <= 1)


def test_uniform_measure_gives_srs_probabilities(rng):
    _, pi = sampford_sample(np.arange(10), 3, rng)
    assert np.allclose(pi, 0.3)


def test_certainty_unit_always_selected(rng):
    s = [50, 1, 2, 1, 3, 1]
    for _ in range(200):
        units, pi = sampford_sample(np.arange(6), 3, rng, s)
        assert 0 in units and pi[list(units).index(0)] == 1.0


def test_sampford_frequencies_small(rng):
    s = np.array([1, 3, 5, 4, 4.5, 2.5])
    pi = inclusion_targets(2, s)
    R = 20_000
    hits = np.zeros(6)
    for _ in range(R):
        hits[sampford_sample(np.arange(6), 2, rng, s)[0]] += 1
    assert np.all(np.abs(hits / R - pi) <= 4 * np.sqrt(pi * (1 - pi) / R))


def test_bulk_draws_unbiased_pooled():
    s = np.random.default_rng(0).lognormal(0, 0.5, 30)
    R = 1_000_000
    ids, pi = sampford_samples(np.arange(30), 6, np.random.default_rng(1), s, R)
    z = (np.bincount(ids.ravel(), minlength=30) / R - pi) / np.sqrt(pi * (1 - pi) / R)
    assert np.all(np.abs(z) <= 4) and abs(z.mean()) < 1.0
    assert np.all(np.diff(np.sort(ids, axis=1), axis=1) > 0)
