"""Matrix containers, SVD kernels and file I/O.

Dense matrices are plain ``numpy.ndarray`` objects of shape ``(n1, n2)``.
Partially observed matrices are :class:`SparseObservation` instances that
keep the observed index set explicitly, so an observed zero is still an
observation.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp

from .errors import InvalidInputError, InvalidRankError, RankDeficientError

__all__ = [
    "SparseObservation",
    "SvdFactors",
    "as_dense",
    "condensed_svd",
    "truncated_svd",
    "condition_number",
    "read_dense_csv",
    "write_dense_csv",
    "read_observation",
    "write_observation",
]


@dataclass(frozen=True)
class SparseObservation:
    """Observed entries ``(rows[t], cols[t]) -> values[t]`` of an n1 x n2 matrix."""

    n_rows: int
    n_cols: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if not (rows.size == cols.size == values.size):
            raise InvalidInputError("rows, cols and values must have equal length")
        if self.n_rows < 1 or self.n_cols < 1:
            raise InvalidInputError("matrix dimensions must be positive")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.n_rows:
                raise InvalidInputError("row index out of bounds")
            if cols.min() < 0 or cols.max() >= self.n_cols:
                raise InvalidInputError("column index out of bounds")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("observed values must be finite")
        linear = rows * self.n_cols + cols
        if np.unique(linear).size != linear.size:
            raise InvalidInputError("duplicate (row, col) entries")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_dense(cls, matrix, mask=None) -> "SparseObservation":
        """Observe ``matrix`` on the boolean ``mask`` (everything if None)."""
        matrix = np.asarray(matrix, dtype=float)
        if mask is None:
            mask = np.ones(matrix.shape, dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != matrix.shape:
            raise InvalidInputError("mask and matrix shapes differ")
        rows, cols = np.nonzero(mask)
        return cls(matrix.shape[0], matrix.shape[1], rows, cols, matrix[rows, cols])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        """Number of observed entries, ``|Omega|``."""
        return int(self.values.size)

    def mask(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=bool)
        out[self.rows, self.cols] = True
        return out

    def to_dense(self) -> np.ndarray:
        """``P_Omega(M)``: observed values in place, zeros elsewhere."""
        out = np.zeros(self.shape)
        out[self.rows, self.cols] = self.values
        return out

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, (self.rows, self.cols)), shape=self.shape)

    def transpose(self) -> "SparseObservation":
        return SparseObservation(self.n_cols, self.n_rows, self.cols, self.rows, self.values)

    @property
    def T(self) -> "SparseObservation":
        return self.transpose()

    def row_degrees(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.n_rows)

    def col_degrees(self) -> np.ndarray:
        return np.bincount(self.cols, minlength=self.n_cols)

    def subset(self, keep: np.ndarray) -> "SparseObservation":
        """Observation restricted to the entries flagged in the boolean ``keep``."""
        keep = np.asarray(keep, dtype=bool)
        return SparseObservation(
            self.n_rows, self.n_cols, self.rows[keep], self.cols[keep], self.values[keep]
        )


MatrixLike = Union[np.ndarray, SparseObservation, sp.spmatrix]


@dataclass(frozen=True)
class SvdFactors:
    """Condensed SVD ``A = U diag(s) V^T`` with ``r`` retained triplets."""

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.singular_values.size)

    def truncate(self, k: int) -> "SvdFactors":
        if not 0 <= k <= self.rank:
            raise InvalidRankError(f"cannot truncate {self.rank} factors to {k}")
        return SvdFactors(
            self.left_vectors[:, :k], self.singular_values[:k], self.right_vectors[:, :k]
        )

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


def as_dense(a: MatrixLike) -> np.ndarray:
    if isinstance(a, SparseObservation):
        return a.to_dense()
    if sp.issparse(a):
        return a.toarray()
    return np.asarray(a, dtype=float)


def _check_finite(a: np.ndarray):
    if a.ndim != 2:
        raise InvalidInputError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")


def condensed_svd(a: MatrixLike, tol: float = 1e-10) -> SvdFactors:
    """SVD keeping only singular values above ``tol * sigma_1``.

    The zero matrix yields rank-0 factors with correctly shaped empty blocks.
    """
    a = as_dense(a)
    _check_finite(a)
    u, s, vt = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesdd")
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s > tol * s[0]))
    return SvdFactors(u[:, :r], s[:r], vt[:r].T)


def _subspace_iteration(a, k, seed, max_iter, tol):
    n1, n2 = a.shape
    block = min(k + max(k, 10), n1, n2)
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(a @ rng.standard_normal((n2, block)))
    for _ in range(max_iter):
        z, _ = np.linalg.qr(a.T @ q)
        q, _ = np.linalg.qr(a @ z)
        ub, s, vbt = np.linalg.svd((a.T @ q).T, full_matrices=False)
        u = q @ ub[:, :k]
        v = vbt[:k].T
        s = s[:k]
        if s[0] == 0.0:
            break
        # a.T @ u = v s holds by construction; the other side measures convergence
        residual = np.linalg.norm(a @ v - u * s)
        if residual <= tol * s[0]:
            break
    return u, s, v


def truncated_svd(
    a: MatrixLike,
    k: int,
    *,
    method: str = "auto",
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-10,
) -> SvdFactors:
    """Top-``k`` singular triplets.

    ``method="dense"`` runs LAPACK on the densified input.
    ``method="subspace"`` runs block subspace iteration with a seeded start
    block, which only touches ``a`` through products and therefore keeps
    sparse inputs sparse. ``"auto"`` picks dense for dense arrays and for
    sparse inputs with at most a few million cells.
    """
    n1, n2 = a.shape
    if not 1 <= k <= min(n1, n2):
        raise InvalidRankError(f"k={k} outside [1, {min(n1, n2)}]")
    if method == "auto":
        method = "dense" if (not _is_sparse(a) or n1 * n2 <= 4_000_000) else "subspace"
    if method == "dense":
        dense = as_dense(a)
        _check_finite(dense)
        u, s, vt = scipy.linalg.svd(dense, full_matrices=False, lapack_driver="gesdd")
        return SvdFactors(u[:, :k], s[:k], vt[:k].T)
    if method != "subspace":
        raise ValueError(f"unknown method {method!r}")
    op = a.to_csr() if isinstance(a, SparseObservation) else a
    if sp.issparse(op):
        if not np.all(np.isfinite(op.data)):
            raise InvalidInputError("matrix has non-finite entries")
        op = sp.csr_matrix(op)
    else:
        op = np.asarray(op, dtype=float)
        _check_finite(op)
    u, s, v = _subspace_iteration(op, k, seed, max_iter, tol)
    return SvdFactors(np.asarray(u), np.asarray(s), np.asarray(v))


def _is_sparse(a) -> bool:
    return isinstance(a, SparseObservation) or sp.issparse(a)


def condition_number(f: SvdFactors, k: int) -> float:
    """``sigma_1 / sigma_k`` of the rank-k part."""
    if not 1 <= k <= f.rank:
        raise InvalidRankError(f"k={k} outside [1, {f.rank}]")
    sk = f.singular_values[k - 1]
    if sk <= 0.0:
        raise RankDeficientError(f"sigma_{k} is zero")
    return float(f.singular_values[0] / sk)


# --------------------------------------------------------------------------
# file formats

def read_dense_csv(path) -> np.ndarray:
    """One matrix row per line, comma separated; ``#`` lines are comments."""
    a = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    _check_finite(a)
    return a


def write_dense_csv(path, a: np.ndarray, header: str = "") -> None:
    np.savetxt(path, np.asarray(a, dtype=float), delimiter=",", fmt="%.17g", header=header)


def write_observation(path, obs: SparseObservation, comment: str = "") -> None:
    """MatrixMarket ``coordinate real general`` with 1-based indices."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        for line in comment.splitlines():
            fh.write(f"% {line}\n")
        fh.write(f"{obs.n_rows} {obs.n_cols} {obs.nnz}\n")
        for i, j, v in zip(obs.rows, obs.cols, obs.values):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")


def read_observation(path) -> SparseObservation:
    """Inverse of :func:`write_observation`; explicit zeros stay observed."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path} not found")
    coo = scipy.io.mmread(str(path))
    if not sp.issparse(coo):
        raise InvalidInputError(f"{path} is not a coordinate MatrixMarket file")
    coo = sp.coo_matrix(coo)
    return SparseObservation(coo.shape[0], coo.shape[1], coo.row, coo.col, coo.data)
