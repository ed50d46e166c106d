import numpy as np
import pytest

from levweight.datagen import (
    GenSpec,
    add_gaussian_noise,
    gen_coherent_lowrank,
    gen_sparse_corruption,
    multivariate_t,
    sample_uniform,
    t_covariance,
)
from levweight.errors import InvalidInputError, InvalidRankError
from levweight.leverage import coherence, leverage_of
from levweight.linalg import condensed_svd


def test_covariance_entries():
    lam = t_covariance(5)
    assert lam[0, 0] == 2.0
    assert lam[0, 1] == 1.0
    assert lam[0, 2] == 0.5
    np.testing.assert_array_equal(lam, lam.T)


def test_genspec_validation():
    with pytest.raises(InvalidRankError):
        GenSpec(5, 4, 5)
    with pytest.raises(InvalidInputError):
        GenSpec(5, 4, 2, cov_decay=1.0)
    assert GenSpec(5, 4, 2, seed=3).as_dict()["seed"] == 3


def test_lowrank_exact_rank():
    a = gen_coherent_lowrank(GenSpec(60, 40, 5, seed=1))
    s = np.linalg.svd(a, compute_uv=False)
    assert s[5] <= 1e-10 * s[0]
    assert condensed_svd(a).rank == 5


def test_lowrank_deterministic():
    spec = GenSpec(30, 20, 3, seed=9)
    np.testing.assert_array_equal(gen_coherent_lowrank(spec), gen_coherent_lowrank(spec))
    assert not np.array_equal(gen_coherent_lowrank(spec), gen_coherent_lowrank(GenSpec(30, 20, 3, seed=10)))


def test_lowrank_matches_manual_construction():
    # independent re-derivation: Cholesky-coloured Gaussians over a chi-square ratio
    spec = GenSpec(7, 5, 3, seed=21)
    rng = np.random.default_rng(21)
    lam = 2.0 * 0.5 ** np.abs(np.subtract.outer(np.arange(3), np.arange(3)))
    chol = np.linalg.cholesky(lam)

    def draw(n):
        z = np.array([chol @ g for g in rng.standard_normal((n, 3))])
        w = rng.chisquare(2, size=n)
        return np.array([z[i] * np.sqrt(2 / w[i]) for i in range(n)])

    u = draw(7)
    v = draw(5)
    np.testing.assert_allclose(gen_coherent_lowrank(spec), u @ v.T, rtol=1e-12, atol=1e-12)


def test_multivariate_t_scale():
    # covariance of t(nu) is nu/(nu-2) * scale for nu > 2
    rng = np.random.default_rng(0)
    lam = t_covariance(3)
    x = multivariate_t(rng, 200_000, lam, 8)
    np.testing.assert_allclose(np.cov(x.T), lam * 8 / 6, atol=0.08)


def test_generated_coherence_large():
    a = gen_coherent_lowrank(GenSpec(2000, 1000, 20, seed=0))
    c = coherence(leverage_of(a, 20))
    assert 1.0 < c <= 2000 / 20
    assert c > 5.0


def test_sample_uniform():
    assert sample_uniform(4, 5, 1.0).sum() == 20
    with pytest.raises(InvalidInputError):
        sample_uniform(4, 5, 0.0)
    counts = np.array([sample_uniform(400, 200, 0.1, seed=s).sum() for s in range(20)])
    sd = np.sqrt(80_000 * 0.1 * 0.9)
    assert np.all(np.abs(counts - 8000) <= 4 * sd)


def test_noise_identity_cases(rng):
    l0 = rng.standard_normal((10, 8))
    np.testing.assert_array_equal(add_gaussian_noise(l0, 0.5, sigma=0.0, mean=0.0), l0)
    np.testing.assert_array_equal(add_gaussian_noise(l0, 0.0, sigma=1.0), l0)


def test_noise_fraction():
    l0 = np.zeros((100, 80))
    m = add_gaussian_noise(l0, 0.5, sigma=1.0, seed=3)
    changed = np.count_nonzero(m != l0)
    assert changed == 4000
    assert abs(m[m != 0].mean() - 1.0) < 4 / np.sqrt(4000)


def test_noise_validation():
    with pytest.raises(InvalidInputError):
        add_gaussian_noise(np.zeros((2, 2)), 1.5)
    with pytest.raises(InvalidInputError):
        add_gaussian_noise(np.zeros((2, 2)), 0.5, sigma=-1.0)


def test_corruption_extremes():
    assert not gen_sparse_corruption(5, 5, 0.0, 2.0).any()
    s = gen_sparse_corruption(5, 5, 1.0, 2.0, seed=1)
    assert np.count_nonzero(s) == 25
    assert set(np.unique(s)) <= {-2.0, 2.0}


def test_corruption_counts():
    n = 300 * 200
    s = gen_sparse_corruption(300, 200, 0.1, 3.0, seed=4)
    nnz = np.count_nonzero(s)
    assert abs(nnz - 6000) <= 4 * np.sqrt(n * 0.1 * 0.9)
    pos = np.count_nonzero(s > 0)
    assert abs(pos - nnz / 2) <= 4 * np.sqrt(nnz / 4)
    assert np.abs(s).max() == 3.0


def test_corruption_validation():
    with pytest.raises(InvalidInputError):
        gen_sparse_corruption(3, 3, 1.2, 1.0)
    with pytest.raises(InvalidInputError):
        gen_sparse_corruption(3, 3, 0.1, 0.0)
