import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def low_rank(rng, n1, n2, r, scale=1.0):
    """Generic rank-r matrix with Gaussian factors."""
    return scale * rng.standard_normal((n1, r)) @ rng.standard_normal((r, n2))


def svd_leverage(a, k):
    """Oracle: projector onto the top-k left singular subspace, via numpy."""
    u, _, _ = np.linalg.svd(np.asarray(a, dtype=float), full_matrices=False)
    uk = u[:, :k]
    return uk @ uk.T


def orthonormal(rng, n, r):
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)



def example_one_bases(a2=0.25):
    """10 x 2 orthonormal block with mu_1 = mu_2 = 0.5 > k/n1 = 0.2 >= mu_j.

    Rows 1 and 2 are ``(a, b)`` and ``(a, -b)`` with ``a^2 = a2`` and
    ``a^2 + b^2 = 1/2``, so ``mu_12 = a^2 - b^2``.  The other eight rows
    have leverage 1/8 and nonzero cross leverage with rows 1 and 2.
    """
    a, b = np.sqrt(a2), np.sqrt(0.5 - a2)
    x = np.full(8, np.sqrt((1 - 2 * a2) / 8))
    y = np.sqrt((1 - 2 * (0.5 - a2)) / 8) * np.array([1, -1] * 4)
    return np.vstack([[[a, b], [a, -b]], np.column_stack([x, y])])
