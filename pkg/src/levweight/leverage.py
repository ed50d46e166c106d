"""Row leverage scores: exact, estimated from sampled entries, and updated.

For a rank-k truncation ``A_k = U_k S_k V_k^T`` the row leverage scores are
the diagonal of the projector ``U_k U_k^T`` and the cross scores are its
off-diagonal entries.  Column scores are obtained by passing ``A.T``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (
    DegenerateObservationError,
    InvalidInputError,
    InvalidRankError,
    InvalidStepError,
    NeedsCrossError,
)
from .linalg import MatrixLike, SparseObservation, SvdFactors, truncated_svd

__all__ = [
    "LeverageProfile",
    "EstimationParams",
    "compute_leverage",
    "leverage_of",
    "coherence",
    "trim",
    "estimate_leverage",
    "rank_one_update",
    "rank_one_scores",
    "reduce_to_bases",
    "scaled_bases",
    "write_profile_csv",
]


@dataclass(frozen=True)
class LeverageProfile:
    """Leverage scores of a rank-``rank`` subspace.

    ``cross`` is the full projector ``U_k U_k^T`` when present; its diagonal
    equals ``scores``.
    """

    rank: int
    scores: np.ndarray
    cross: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return int(self.scores.size)

    def require_cross(self) -> np.ndarray:
        if self.cross is None:
            raise NeedsCrossError("profile was computed without cross leverage scores")
        return self.cross


@dataclass(frozen=True)
class EstimationParams:
    target_rank: int
    accuracy_rho: float = 10.0
    trim_mode: str = "subsample"
    seed: int = 0

    def __post_init__(self):
        if not self.accuracy_rho > 1:
            raise InvalidInputError("accuracy_rho must exceed 1")
        if self.trim_mode not in ("subsample", "zero-out"):
            raise InvalidInputError(f"unknown trim mode {self.trim_mode!r}")


def compute_leverage(f: SvdFactors, k: int, with_cross: bool = False) -> LeverageProfile:
    if not 1 <= k <= f.rank:
        raise InvalidRankError(f"k={k} but only {f.rank} factors available")
    u = f.left_vectors[:, :k]
    scores = np.einsum("ij,ij->i", u, u)
    cross = u @ u.T if with_cross else None
    return LeverageProfile(k, scores, cross)


def leverage_of(a: MatrixLike, k: int, with_cross: bool = False) -> LeverageProfile:
    """Exact leverage scores of the best rank-k approximation of ``a``."""
    return compute_leverage(truncated_svd(a, k, method="dense"), k, with_cross)


def coherence(p: LeverageProfile, n: Optional[int] = None) -> float:
    """Row coherence ``(n / k) max_i mu_i``; ``n`` defaults to the row count."""
    n = p.n if n is None else n
    return float(n / p.rank * np.max(p.scores))


def trim(obs: SparseObservation, mode: str = "subsample", seed: int = 0) -> SparseObservation:
    """Limit row and column degrees of a sampled matrix.

    Rows with more than ``2|Omega|/n1`` entries are handled first, columns
    with more than ``2|Omega|/n2`` second, both thresholds computed from the
    input ``|Omega|``.  ``"zero-out"`` empties offending rows/columns;
    ``"subsample"`` keeps a uniformly random ``floor(|Omega|/n)`` of their
    entries.
    """
    if mode not in ("subsample", "zero-out"):
        raise InvalidInputError(f"unknown trim mode {mode!r}")
    n1, n2 = obs.shape
    total = obs.nnz
    rng = np.random.default_rng(seed)
    keep = np.ones(total, dtype=bool)
    for index, n in ((obs.rows, n1), (obs.cols, n2)):
        degree = np.bincount(index[keep], minlength=n)
        over = np.flatnonzero(degree > 2 * total / n)
        if over.size == 0:
            continue
        if mode == "zero-out":
            keep &= ~np.isin(index, over)
            continue
        quota = total // n
        for line in over:
            members = np.flatnonzero(keep & (index == line))
            drop = rng.permutation(members)[quota:]
            keep[drop] = False
    return obs.subset(keep)


def estimate_leverage(
    obs: SparseObservation, params: EstimationParams, with_cross: bool = False
) -> LeverageProfile:
    """Leverage of the rank-k truncation of the trimmed observation."""
    k = params.target_rank
    if not 1 <= k <= min(obs.shape):
        raise InvalidRankError(f"k={k} outside [1, {min(obs.shape)}]")
    if obs.nnz == 0:
        raise DegenerateObservationError("no observed entries")
    trimmed = trim(obs, params.trim_mode, params.seed)
    if trimmed.nnz == 0:
        raise DegenerateObservationError("trim removed every observed entry")
    f = truncated_svd(trimmed, k, seed=params.seed)
    s = f.singular_values
    if s[-1] <= 1e-12 * max(s[0], np.finfo(float).tiny):
        raise DegenerateObservationError(f"observation has rank below {k}")
    return compute_leverage(f, k, with_cross)


def rank_one_update(p: LeverageProfile, i: int, gamma: float) -> LeverageProfile:
    """Profile of ``W M`` where ``W`` scales row ``i`` by ``sqrt(1 - gamma)``.

    With ``P`` the current projector, ``u = P[i]`` and ``c = 1 - gamma mu_i``
    the new projector is ``W (P + (gamma / c) u u^T) W``; no matrix is touched.
    """
    cross = p.require_cross()
    if not 0.0 < gamma < 1.0:
        raise InvalidStepError(f"gamma={gamma} outside (0, 1)")
    mu_i = cross[i, i]
    c = 1.0 - gamma * mu_i
    if c <= 0.0:
        raise InvalidStepError("gamma * mu_i must be below 1")
    u = cross[i].copy()
    new = cross + (gamma / c) * np.outer(u, u)
    w = np.sqrt(1.0 - gamma)
    new[i, :] *= w
    new[:, i] *= w
    return replace(p, scores=np.diag(new).copy(), cross=new)


def rank_one_scores(p: LeverageProfile, i: int, gammas) -> np.ndarray:
    """Row scores after scaling row ``i`` for each step in ``gammas``.

    Returns an array of shape ``(len(gammas), n)``; row ``g`` equals
    ``rank_one_update(p, i, gammas[g]).scores``.
    """
    cross = p.require_cross()
    g = np.atleast_1d(np.asarray(gammas, dtype=float))[:, None]
    mu_i = cross[i, i]
    c = 1.0 - g * mu_i
    out = p.scores[None, :] + g * cross[i][None, :] ** 2 / c
    out[:, i] = ((1.0 - g) * mu_i / c)[:, 0]
    return out


def reduce_to_bases(f: SvdFactors) -> np.ndarray:
    """Orthonormal column bases ``U`` of a rank-r matrix.

    For any nonsingular diagonal ``R`` the rank-r leverage scores of ``R A``
    and ``R U`` coincide, so ``U`` can stand in for ``A`` with r columns.
    """
    return f.left_vectors


def scaled_bases(f: SvdFactors) -> np.ndarray:
    """``U diag(s)``: bases that also keep rank-k truncations of ``R A`` exact.

    ``R A = (R U S) V^T`` with ``V`` column-orthonormal, so ``R A`` and
    ``R U S`` share left singular vectors and singular values.
    """
    return f.left_vectors * f.singular_values


def write_profile_csv(path, p: LeverageProfile) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "score"])
        for idx, s in enumerate(p.scores):
            w.writerow([idx, repr(float(s))])
