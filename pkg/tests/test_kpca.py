import numpy as np
import pytest
from hypothesis import given, strategies as st

from surveykit import kpca
from surveykit.errors import DegenerateData, DimensionMismatch, LengthMismatch, SurveyKitError
from surveykit.kpca import KernelConfig

from oracles import kpca_oracle


def random_rows(rng, n, p, c=3):
    return rng.integers(0, c, size=(n, p))


def test_hamming_examples():
    assert kpca.hamming([1, 2, 3], [1, 2, 4]) == 1
    assert kpca.hamming(np.zeros(19), np.ones(19)) == 19
    with pytest.raises(LengthMismatch):
        kpca.hamming([1, 2], [1, 2, 3])


def test_kernel_value():
    assert kpca.kernel([0, 1], [0, 0]) == pytest.approx(np.exp(-1))
    assert kpca.kernel([0, 1], [0, 1]) == 1.0


def test_config_validation():
    with pytest.raises(SurveyKitError):
        KernelConfig(gamma=0)
    with pytest.raises(SurveyKitError):
        KernelConfig(variance_fraction=1.5)


def test_center_gram_four_term_formula(rng):
    A = rng.normal(size=(6, 6))
    K = A @ A.T
    w = rng.random(6)
    w /= w.sum()
    cg = kpca.center_gram(K, w)
    expected = np.array([[K[i, j] - w @ K[i] - w @ K[:, j] + w @ K @ w for j in range(6)]
                         for i in range(6)])
    assert np.allclose(cg.matrix, expected, atol=1e-12)
    assert np.max(np.abs(cg.matrix @ w)) < 1e-10
    with pytest.raises(DimensionMismatch):
        kpca.center_gram(K, w[:5])


def test_point_mass_weights_center_that_point():
    K = kpca.gram(np.array([[0, 1], [1, 1], [2, 0]]))
    cg = kpca.center_gram(K, np.array([1.0, 0.0, 0.0]))
    assert cg.matrix[0, 0] == pytest.approx(0.0, abs=1e-15)


def test_identical_rows_are_degenerate():
    with pytest.raises(DegenerateData):
        kpca.fit(np.zeros((5, 3), dtype=int))


def test_eigenvalues_match_explicit_embedding(rng):
    rows = random_rows(rng, 5, 3)
    model = kpca.fit(rows)
    _, lam, _ = kpca_oracle(rows, rows, [3] * 3, np.ones(5), 0.95)
    assert np.allclose(model.eigenvalues[: lam.size], lam, atol=1e-8)


@pytest.mark.parametrize("vf", [0.95, 0.99])
def test_scores_match_oracle_weighted(rng, vf):
    for _ in range(5):
        n, p = rng.integers(4, 12), rng.integers(2, 5)
        rows = random_rows(rng, n, p)
        w = rng.uniform(0.2, 3, n)
        model = kpca.fit(rows, w, KernelConfig(1.0, vf))
        test = random_rows(rng, 4, p)
        ref, _, k = kpca_oracle(rows, np.vstack([rows, test]), [3] * p, w, vf)
        assert model.n_components == k
        assert np.allclose(model.training_scores(), ref[:n], atol=1e-8)
        assert np.allclose(model.score(np.vstack([rows, test])), np.maximum(ref, 0), atol=1e-8)


def test_full_basis_reconstructs_training_rows(rng):
    rows = random_rows(rng, 10, 4)
    model = kpca.fit(rows, None, KernelConfig(1.0, 1.0))
    assert np.max(model.training_scores()) <= 1e-8
    assert np.max(model.score(rows)) <= 1e-8


def test_common_row_scores_below_unique_row(rng):
    common = np.array([0, 0, 0, 0, 0])
    rows = np.vstack([np.tile(common, (20, 1)), random_rows(rng, 20, 5, 2)])
    model = kpca.fit(rows)
    unique = np.array([[2, 2, 2, 2, 2]])
    assert kpca.reconstruction_error(model, common) <= kpca.reconstruction_error(model, unique[0])


def test_save_load_roundtrip(tmp_path, rng):
    rows = random_rows(rng, 12, 4)
    model = kpca.fit(rows)
    kpca.save_model(model, tmp_path / "m.npz")
    back = kpca.load_model(tmp_path / "m.npz")
    assert np.allclose(back.score(rows), model.score(rows))


@given(st.integers(0, 2 ** 31))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 15))
    rows = random_rows(rng, n, 4)
    if len({tuple(r) for r in rows}) < 2:
        return
    w = rng.uniform(0.5, 2, n)
    perm = rng.permutation(n)
    a = kpca.fit(rows, w).training_scores()
    b = kpca.fit(rows[perm], w[perm]).training_scores()
    assert np.allclose(a[perm], b, atol=1e-8)


@given(st.integers(0, 2 ** 31))
def test_kernel_symmetric_and_bounded(seed):
    rng = np.random.default_rng(seed)
    rows = random_rows(rng, 8, 5)
    K = kpca.gram(rows)
    assert np.allclose(K, K.T) and np.all(K > 0) and np.all(K <= 1)
    assert np.min(np.linalg.eigvalsh(K)) >= -1e-10
