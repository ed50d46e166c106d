"""Weighted nuclear-norm matrix completion.

Solves ``min_L 0.5 ||P_Omega(L - M)||_F^2 + lam ||R L C||_*`` for diagonal
``R``, ``C`` by ADMM on the split ``X = R L C``, and wraps it in the
alternating weighting / completion loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, SingularWeightError, UndefinedReferenceError
from .leverage import coherence, leverage_of
from .linalg import SparseObservation
from .weighting import (
    DiagonalWeights,
    WeightingConfig,
    WeightingTrace,
    coordinate_descent,
    hinge_loss,
    target_scores_uniform,
)

__all__ = [
    "AdmmConfig",
    "RecoveryResult",
    "RoundDiagnostics",
    "singular_value_threshold",
    "admm_weighted_complete",
    "admm_unweighted_complete",
    "weighting_completion",
    "relative_error",
    "coherence",
    "lambda_grid",
]


@dataclass(frozen=True)
class AdmmConfig:
    """``lam`` weights the nuclear norm, ``admm_penalty`` is the augmented-Lagrangian rho.

    ``admm_penalty=None`` picks ``rho = lam / rms`` where ``rms`` is the root
    mean square of the weighted observed entries, i.e. the singular-value
    threshold ``lam / rho`` equals the typical entry size.

    Convergence requires both ``||RLC - X||_F <= primal_tol * max(||RLC||_F, ||X||_F)``
    and ``||X - X_prev||_F <= primal_tol * ||X||_F``.
    """

    lam: float = 1.0
    admm_penalty: Optional[float] = None
    max_iters: int = 500
    primal_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.admm_penalty is not None and not self.admm_penalty > 0:
            raise InvalidInputError("admm_penalty must be positive")
        if not (self.lam > 0 and self.max_iters > 0 and self.primal_tol > 0):
            raise InvalidInputError("ADMM parameters must be positive")


@dataclass
class RecoveryResult:
    recovered: np.ndarray
    iterations: int
    residual_trace: list = field(default_factory=list)
    converged: bool = False
    lam: Optional[float] = None


def singular_value_threshold(a: np.ndarray, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Proximal map of ``tau ||.||_*``; returns the matrix and its new singular values."""
    u, s, vt = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesdd")
    s = np.maximum(s - tau, 0.0)
    r = int(np.count_nonzero(s))
    return (u[:, :r] * s[:r]) @ vt[:r], s


def _active(weights: DiagonalWeights, degrees: np.ndarray, what: str) -> np.ndarray:
    zero = weights.values == 0.0
    bad = zero & ~weights.abandoned & (degrees > 0)
    if np.any(bad):
        raise SingularWeightError(f"zero {what} weight on observed {what}s {np.flatnonzero(bad)[:5].tolist()}")
    return ~zero


def _auto_penalty(lam: float, weighted_values: np.ndarray) -> float:
    rms = float(np.sqrt(np.mean(weighted_values**2))) if weighted_values.size else 0.0
    return lam / rms if rms > 0 else 1.0


def admm_weighted_complete(
    obs: SparseObservation,
    row_weights: Optional[DiagonalWeights] = None,
    col_weights: Optional[DiagonalWeights] = None,
    cfg: AdmmConfig = AdmmConfig(),
) -> RecoveryResult:
    """ADMM for regularised weighted nuclear-norm completion.

    ``L``, ``X``, ``Y`` start at zero.  Rows/columns with weight zero (which
    must be flagged abandoned when they carry observations) are dropped
    from the problem and come back as zeros.
    """
    n1, n2 = obs.shape
    row_weights = DiagonalWeights.identity(n1) if row_weights is None else row_weights
    col_weights = DiagonalWeights.identity(n2) if col_weights is None else col_weights
    if len(row_weights) != n1 or len(col_weights) != n2:
        raise InvalidInputError("weight lengths do not match the observation")
    rows_on = _active(row_weights, obs.row_degrees(), "row")
    cols_on = _active(col_weights, obs.col_degrees(), "column")

    r = row_weights.values[rows_on]
    c = col_weights.values[cols_on]
    keep = rows_on[obs.rows] & cols_on[obs.cols]
    row_map = np.cumsum(rows_on) - 1
    col_map = np.cumsum(cols_on) - 1
    oi, oj = row_map[obs.rows[keep]], col_map[obs.cols[keep]]
    m_obs = obs.values[keep]

    rc = np.outer(r, c)
    mask = np.zeros(rc.shape, dtype=bool)
    mask[oi, oj] = True
    rc_obs = rc[oi, oj]
    inv_rc = 1.0 / rc
    lam = cfg.lam
    rho = cfg.admm_penalty if cfg.admm_penalty is not None else _auto_penalty(lam, rc_obs * m_obs)

    L = np.zeros(rc.shape)
    X = np.zeros(rc.shape)
    Y = np.zeros(rc.shape)
    trace = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        L = inv_rc * (X - Y / rho)
        L[oi, oj] = (m_obs + rho * rc_obs * X[oi, oj] - rc_obs * Y[oi, oj]) / (1.0 + rho * rc_obs**2)
        RLC = rc * L
        X_prev = X
        X, _ = singular_value_threshold(Y / rho + RLC, lam / rho)
        resid = RLC - X
        Y = Y + rho * resid
        primal = float(np.linalg.norm(resid))
        trace.append(primal)
        scale = max(np.linalg.norm(RLC), np.linalg.norm(X), np.finfo(float).tiny)
        change = np.linalg.norm(X - X_prev)
        if primal <= cfg.primal_tol * scale and change <= cfg.primal_tol * scale:
            converged = True
            break

    out = np.zeros((n1, n2))
    out[np.ix_(rows_on, cols_on)] = L
    return RecoveryResult(out, it, trace, converged, lam)


def admm_unweighted_complete(obs: SparseObservation, cfg: AdmmConfig = AdmmConfig()) -> RecoveryResult:
    """Plain ADMM for ``0.5 ||P_Omega(L - M)||^2 + lam ||L||_*`` (reference path)."""
    lam = cfg.lam
    rho = cfg.admm_penalty if cfg.admm_penalty is not None else _auto_penalty(lam, obs.values)
    M = obs.to_dense()
    mask = obs.mask()
    L = np.zeros(obs.shape)
    X = np.zeros(obs.shape)
    Y = np.zeros(obs.shape)
    trace = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        L = np.where(mask, (M + rho * X - Y) / (1.0 + rho), X - Y / rho)
        X_prev = X
        X, _ = singular_value_threshold(Y / rho + L, lam / rho)
        resid = L - X
        Y = Y + rho * resid
        primal = float(np.linalg.norm(resid))
        trace.append(primal)
        scale = max(np.linalg.norm(L), np.linalg.norm(X), np.finfo(float).tiny)
        if primal <= cfg.primal_tol * scale and np.linalg.norm(X - X_prev) <= cfg.primal_tol * scale:
            converged = True
            break
    return RecoveryResult(L, it, trace, converged, lam)


def relative_error(L: np.ndarray, L0: np.ndarray) -> float:
    """``||L - L0||_F / ||L0||_F``."""
    L = np.asarray(L, dtype=float)
    L0 = np.asarray(L0, dtype=float)
    if L.shape != L0.shape:
        raise InvalidInputError("shapes differ")
    ref = np.linalg.norm(L0)
    if ref == 0.0:
        raise UndefinedReferenceError("reference matrix is zero")
    return float(np.linalg.norm(L - L0) / ref)


def lambda_grid(obs: SparseObservation, exponents=range(-3, 3)) -> np.ndarray:
    """``10**e * ||P_Omega(M)||_F / sqrt(|Omega|)`` for each exponent ``e``."""
    base = np.linalg.norm(obs.values) / np.sqrt(max(obs.nnz, 1))
    return np.array([10.0**e * base for e in exponents])


@dataclass
class RoundDiagnostics:
    round: int
    row_weights: DiagonalWeights
    col_weights: DiagonalWeights
    row_trace: WeightingTrace
    col_trace: WeightingTrace
    coherence: float
    l1_loss: float
    result: RecoveryResult


def weighting_completion(
    obs: SparseObservation,
    k: int,
    rounds: int,
    wcfg: WeightingConfig,
    acfg: AdmmConfig,
    reference: Optional[np.ndarray] = None,
    later_wcfg: Optional[WeightingConfig] = None,
) -> tuple[RecoveryResult, list]:
    """Alternate weight estimation and weighted completion for ``rounds`` rounds.

    Round 1 weighs the trimmed observation; round ``s > 1`` weighs the
    completion from round ``s - 1`` (using ``later_wcfg`` if given).  The
    per-round diagnostics carry the weighting traces (with exact values for
    ``reference`` when supplied) and the row coherence and l1 loss of the
    recovered matrix.
    """
    if rounds < 1:
        raise InvalidInputError("rounds must be at least 1")
    n1, n2 = obs.shape
    current = obs
    diagnostics = []
    result = None
    for s in range(1, rounds + 1):
        cfg = wcfg if (s == 1 or later_wcfg is None) else later_wcfg
        ref_t = None if reference is None else reference.T
        R, row_trace = coordinate_descent(current, k, cfg, reference=reference)
        C, col_trace = coordinate_descent(
            current.T if isinstance(current, SparseObservation) else current.T, k, cfg, reference=ref_t
        )
        result = admm_weighted_complete(obs, R, C, acfg)
        profile = leverage_of(result.recovered, k)
        diagnostics.append(
            RoundDiagnostics(
                s, R, C, row_trace, col_trace,
                coherence(profile),
                hinge_loss(profile, target_scores_uniform(n1, k), 1),
                result,
            )
        )
        current = result.recovered
    return result, diagnostics
