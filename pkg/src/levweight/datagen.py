"""Seeded synthetic data: coherent low-rank matrices, masks, noise, corruption.

All generators draw from ``numpy.random.Generator(PCG64(seed))``
(``numpy.random.default_rng``), whose stream is stable across platforms
for a given numpy major version.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidInputError, InvalidRankError

__all__ = [
    "GenSpec",
    "t_covariance",
    "multivariate_t",
    "gen_coherent_lowrank",
    "sample_uniform",
    "add_gaussian_noise",
    "gen_sparse_corruption",
]


@dataclass(frozen=True)
class GenSpec:
    n1: int
    n2: int
    k: int
    seed: int = 0
    t_dof: int = 2
    cov_base: float = 2.0
    cov_decay: float = 0.5

    def __post_init__(self):
        if not 1 <= self.k <= min(self.n1, self.n2):
            raise InvalidRankError("need 1 <= k <= min(n1, n2)")
        if not 0 < self.cov_decay < 1:
            raise InvalidInputError("cov_decay must lie in (0, 1)")
        if self.t_dof < 1 or self.cov_base <= 0:
            raise InvalidInputError("t_dof and cov_base must be positive")

    def as_dict(self) -> dict:
        return asdict(self)


def t_covariance(k: int, base: float = 2.0, decay: float = 0.5) -> np.ndarray:
    """Scale matrix ``base * decay**|i-j|``."""
    idx = np.arange(k)
    return base * decay ** np.abs(idx[:, None] - idx[None, :])


def multivariate_t(rng: np.random.Generator, n: int, scale: np.ndarray, dof: int) -> np.ndarray:
    """``n`` rows of a multivariate t: ``z * sqrt(dof / w)``, z Gaussian, w chi-square."""
    chol = np.linalg.cholesky(scale)
    z = rng.standard_normal((n, scale.shape[0])) @ chol.T
    w = rng.chisquare(dof, size=n)
    return z * np.sqrt(dof / w)[:, None]


def gen_coherent_lowrank(spec: GenSpec) -> np.ndarray:
    """``L0 = U V^T`` with heavy-tailed rows, hence high row/column coherence."""
    rng = np.random.default_rng(spec.seed)
    scale = t_covariance(spec.k, spec.cov_base, spec.cov_decay)
    u = multivariate_t(rng, spec.n1, scale, spec.t_dof)
    v = multivariate_t(rng, spec.n2, scale, spec.t_dof)
    return u @ v.T


def sample_uniform(n1: int, n2: int, p: float, seed: int = 0) -> np.ndarray:
    """Boolean mask with each cell observed independently with probability p."""
    if not 0 < p <= 1:
        raise InvalidInputError(f"p={p} outside (0, 1]")
    if p == 1:
        return np.ones((n1, n2), dtype=bool)
    rng = np.random.default_rng(seed)
    return rng.random((n1, n2)) < p


def add_gaussian_noise(
    l0: np.ndarray,
    fraction: float = 0.5,
    sigma: float = 1.0,
    mean: float = 1.0,
    seed: int = 0,
) -> np.ndarray:
    """Add ``N(mean, sigma^2)`` to a uniformly chosen ``fraction`` of entries.

    The number of perturbed entries is ``round(fraction * l0.size)``.
    """
    if not 0 <= fraction <= 1:
        raise InvalidInputError("fraction must lie in [0, 1]")
    if sigma < 0:
        raise InvalidInputError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    out = np.array(l0, dtype=float, copy=True)
    count = int(round(fraction * out.size))
    flat = out.reshape(-1)
    picked = rng.permutation(out.size)[:count]
    flat[picked] += rng.normal(mean, sigma, size=count)
    return out


def gen_sparse_corruption(n1: int, n2: int, p: float, s: float, seed: int = 0) -> np.ndarray:
    """Entries ``+s`` w.p. p/2, ``-s`` w.p. p/2, zero otherwise."""
    if not 0 <= p <= 1:
        raise InvalidInputError("p must lie in [0, 1]")
    if not s > 0:
        raise InvalidInputError("s must be positive")
    rng = np.random.default_rng(seed)
    u = rng.random((n1, n2))
    out = np.zeros((n1, n2))
    out[u < p / 2] = s
    out[(u >= p / 2) & (u < p)] = -s
    return out
