"""Robust PCA and its row/column weighted variants.

The model is ``min ||S||_1 + lam ||L||_*  s.t.  L + S = D``.  Dividing by
``lam`` gives the familiar principal component pursuit form
``||L||_* + (1/lam) ||S||_1``, which is what the solver works with.

Weighted RPCA flattens the leverage scores of ``D`` first: row weights
``R`` and column weights ``C`` come from coordinate descent on ``D`` and
``D^T``, RPCA runs on ``R D C`` and the result is mapped back with
``R^-1 (.) C^-1``.  Type 2 repeats this once with weights computed from
the Type 1 low-rank estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .completion import singular_value_threshold
from .errors import InvalidInputError, SingularWeightError
from .weighting import DiagonalWeights, WeightingConfig, WeightingTrace, coordinate_descent

__all__ = [
    "RpcaConfig",
    "RpcaResult",
    "soft_threshold",
    "rpca",
    "weighted_rpca",
]


@dataclass(frozen=True)
class RpcaConfig:
    """Solver settings.

    ``lambda_rpca`` multiplies ``||L||_*``; ``None`` means
    ``sqrt(max(n1, n2))``, i.e. the usual ``1/sqrt(max(n1, n2))`` weight on
    ``||S||_1`` after normalising the nuclear term.  ``admm_penalty=None``
    starts the penalty at ``1.25 / ||D||_2``; it is multiplied by
    ``penalty_growth`` after every iteration (use 1 for a fixed penalty).
    """

    lambda_rpca: Optional[float] = None
    admm_penalty: Optional[float] = None
    penalty_growth: float = 1.5
    max_iters: int = 500
    tol: float = 1e-7

    def __post_init__(self):
        for name in ("lambda_rpca", "admm_penalty"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InvalidInputError(f"{name} must be positive")
        if not (self.penalty_growth >= 1 and self.max_iters > 0 and self.tol > 0):
            raise InvalidInputError("invalid RPCA solver settings")

    def lam_for(self, shape) -> float:
        return float(np.sqrt(max(shape))) if self.lambda_rpca is None else self.lambda_rpca


@dataclass
class RpcaResult:
    low_rank: np.ndarray
    sparse: np.ndarray
    iterations: int
    converged: bool
    residual_trace: list = field(default_factory=list)
    row_weights: Optional[DiagonalWeights] = None
    col_weights: Optional[DiagonalWeights] = None
    traces: list = field(default_factory=list)


def soft_threshold(a: np.ndarray, tau: float) -> np.ndarray:
    """Entrywise shrinkage ``sign(a) max(|a| - tau, 0)``."""
    return np.sign(a) * np.maximum(np.abs(a) - tau, 0.0)


def rpca(D: np.ndarray, cfg: RpcaConfig = RpcaConfig()) -> RpcaResult:
    """Inexact augmented Lagrangian solve of the RPCA model.

    Iterates ``S = shrink(D - L + Y/mu, 1/(lam mu))``,
    ``L = svt(D - S + Y/mu, 1/mu)``, ``Y += mu (D - L - S)``, ``mu *= growth``
    until ``||D - L - S||_F <= tol ||D||_F``.
    """
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or not np.all(np.isfinite(D)):
        raise InvalidInputError("D must be a finite 2-d matrix")
    lam = cfg.lam_for(D.shape)
    norm_fro = np.linalg.norm(D)
    L = np.zeros_like(D)
    S = np.zeros_like(D)
    if norm_fro == 0.0:
        return RpcaResult(L, S, 0, True, [0.0])
    norm_two = scipy.linalg.norm(D, 2)
    mu = cfg.admm_penalty if cfg.admm_penalty is not None else 1.25 / norm_two
    # dual start scaled so that it is feasible for the dual norm ball
    Y = D / max(norm_two, np.abs(D).max() * lam)
    trace = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        S = soft_threshold(D - L + Y / mu, 1.0 / (lam * mu))
        L, _ = singular_value_threshold(D - S + Y / mu, 1.0 / mu)
        Z = D - L - S
        Y = Y + mu * Z
        mu *= cfg.penalty_growth
        err = float(np.linalg.norm(Z) / norm_fro)
        trace.append(err)
        if err <= cfg.tol:
            converged = True
            break
    return RpcaResult(L, S, it, converged, trace)


def _weights(matrix: np.ndarray, k: int, wcfg: WeightingConfig):
    R, row_trace = coordinate_descent(matrix, k, wcfg)
    C, col_trace = coordinate_descent(matrix.T, k, wcfg)
    for w, what in ((R, "row"), (C, "column")):
        if np.any(w.values == 0.0):
            raise SingularWeightError(f"zero {what} weight; weighted RPCA needs invertible weights")
    return R, C, [row_trace, col_trace]


def _weighted_solve(D, R, C, cfg) -> RpcaResult:
    r, c = R.values, C.values
    res = rpca(r[:, None] * D * c[None, :], cfg)
    scale = np.outer(1.0 / r, 1.0 / c)
    return RpcaResult(
        res.low_rank * scale, res.sparse * scale, res.iterations, res.converged,
        res.residual_trace, R, C,
    )


def weighted_rpca(
    D: np.ndarray,
    k: int,
    variant: str = "type1",
    wcfg: WeightingConfig = WeightingConfig(),
    cfg: RpcaConfig = RpcaConfig(),
) -> RpcaResult:
    """RPCA on ``R D C`` with leverage-flattening weights, mapped back.

    ``variant="type1"`` computes the weights from ``D``; ``"type2"`` then
    recomputes them from the Type 1 low-rank estimate and solves again.
    ``traces`` holds the row and column weighting traces of each pass.
    """
    if variant not in ("type1", "type2"):
        raise InvalidInputError(f"unknown variant {variant!r}")
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or not np.all(np.isfinite(D)):
        raise InvalidInputError("D must be a finite 2-d matrix")
    R, C, traces = _weights(D, k, wcfg)
    res = _weighted_solve(D, R, C, cfg)
    all_traces: list[WeightingTrace] = list(traces)
    if variant == "type2":
        R, C, traces = _weights(res.low_rank, k, wcfg)
        res = _weighted_solve(D, R, C, cfg)
        all_traces += traces
    res.traces = all_traces
    return res
