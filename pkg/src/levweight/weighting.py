"""Diagonal row weights that flatten leverage scores.

The objective is the lq hinge loss ``(sum_i max(mu_i(RM) - mu_i*, 0)^q)^(1/q)``
minimised over diagonal ``0 < R <= I`` one coordinate at a time: each step
multiplies a single diagonal entry by ``sqrt(1 - gamma)``.  Two drivers are
provided:

* :func:`coordinate_descent` works from a (possibly sampled) observation,
  re-estimating leverage scores from a truncated SVD at every step and
  choosing ``gamma`` with the medium/large estimated-leverage rules.
* :func:`coordinate_descent_exact` assumes exact leverage scores and chains
  closed-form rank-one updates, with lq line search for the step size.

Column weights are row weights of the transpose.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import (
    DegenerateObservationError,
    InvalidDimsError,
    InvalidInputError,
    InvalidLeverageError,
    InvalidMarginalsError,
    InvalidRankError,
)
from .leverage import (
    LeverageProfile,
    coherence,
    compute_leverage,
    rank_one_scores,
    rank_one_update,
    scaled_bases,
    trim,
)
from .linalg import SparseObservation, condensed_svd, truncated_svd

__all__ = [
    "TargetScores",
    "DiagonalWeights",
    "WeightingConfig",
    "WeightingTrace",
    "target_scores_uniform",
    "target_scores_from_marginals",
    "hinge_loss",
    "gamma_exact",
    "gamma_medium",
    "gamma_large",
    "medium_upper_bound",
    "line_search_step",
    "coordinate_descent",
    "coordinate_descent_exact",
]

INF = math.inf


@dataclass(frozen=True)
class TargetScores:
    """Desired leverage scores; rows with a negative target are abandoned."""

    values: np.ndarray

    @property
    def abandoned(self) -> np.ndarray:
        return self.values < 0

    @property
    def abandoned_rows(self) -> set:
        return set(np.flatnonzero(self.abandoned).tolist())

    def __len__(self):
        return int(self.values.size)


@dataclass(frozen=True)
class DiagonalWeights:
    """Diagonal of a weight matrix; ``abandoned`` marks rows deliberately zeroed."""

    values: np.ndarray
    abandoned: Optional[np.ndarray] = None

    @classmethod
    def identity(cls, n: int) -> "DiagonalWeights":
        return cls(np.ones(n))

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        ab = np.zeros(values.size, dtype=bool) if self.abandoned is None else np.asarray(self.abandoned, dtype=bool)
        object.__setattr__(self, "abandoned", ab)
        if values.ndim != 1 or ab.shape != values.shape:
            raise InvalidInputError("weights must be a vector with a matching abandoned mask")
        if np.any(values < 0) or np.any(values > 1) or not np.all(np.isfinite(values)):
            raise InvalidInputError("weights must lie in [0, 1]")

    def __len__(self):
        return int(self.values.size)

    def is_identity(self) -> bool:
        return bool(np.all(self.values == 1.0))

    def apply_rows(self, a: np.ndarray) -> np.ndarray:
        return self.values[:, None] * a


@dataclass(frozen=True)
class WeightingConfig:
    """Parameters of :func:`coordinate_descent`.

    ``max_steps=None`` means ``k**2``.  ``loss_q`` selects the loss recorded
    in traces of the exact driver (the estimated driver always optimises l1).
    """

    accuracy_rho: float = 20.0
    max_steps: Optional[int] = None
    loss_q: float = 1
    refresh_period: int = 50
    seed: int = 0
    trim_mode: str = "subsample"

    def __post_init__(self):
        if not self.accuracy_rho > 1:
            raise InvalidInputError("accuracy_rho must exceed 1")
        if self.max_steps is not None and self.max_steps < 1:
            raise InvalidInputError("max_steps must be at least 1")
        if self.loss_q not in (1, 2, INF):
            raise InvalidInputError("loss_q must be 1, 2 or inf")
        if self.refresh_period < 1:
            raise InvalidInputError("refresh_period must be at least 1")

    def steps_for(self, k: int) -> int:
        return k * k if self.max_steps is None else self.max_steps


# --------------------------------------------------------------------------
# targets and loss

def target_scores_uniform(n1: int, k: int) -> TargetScores:
    if not 1 <= k <= n1:
        raise InvalidRankError(f"k={k} outside [1, {n1}]")
    return TargetScores(np.full(n1, k / n1))


def target_scores_from_marginals(row_marginals, k: int) -> TargetScores:
    """``mu_i* = 2k p_i / sum(p) - k / n1`` for row sampling marginals ``p``."""
    p = np.asarray(row_marginals, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise InvalidMarginalsError("marginals must be a finite nonnegative vector")
    total = p.sum()
    if total <= 0:
        raise InvalidMarginalsError("marginals are all zero")
    return TargetScores(2 * k * p / total - k / p.size)


def _excess(scores: np.ndarray, targets: TargetScores) -> np.ndarray:
    ex = np.maximum(scores - targets.values, 0.0)
    ex[..., targets.abandoned] = 0.0
    return ex


def _reduce(excess: np.ndarray, q) -> np.ndarray:
    if q == 1:
        return excess.sum(axis=-1)
    if q == 2:
        return np.sqrt((excess**2).sum(axis=-1))
    if q == INF:
        return excess.max(axis=-1, initial=0.0)
    raise InvalidInputError("q must be 1, 2 or inf")


def hinge_loss(p: Union[LeverageProfile, np.ndarray], t: TargetScores, q=1) -> float:
    scores = p.scores if isinstance(p, LeverageProfile) else np.asarray(p, dtype=float)
    if scores.shape != t.values.shape:
        raise InvalidInputError("score and target lengths differ")
    return float(_reduce(_excess(scores, t), q))


# --------------------------------------------------------------------------
# closed-form step sizes

def gamma_exact(mu_i: float, mu_target: float) -> float:
    """Step that moves a leverage score from ``mu_i`` exactly to ``mu_target``."""
    if not (0 < mu_target <= mu_i < 1):
        raise InvalidLeverageError(f"need 0 < target <= mu < 1, got mu={mu_i}, target={mu_target}")
    return (1.0 - mu_target / mu_i) / (1.0 - mu_target)


def gamma_medium(mu_hat: float, n1: int, k: int) -> float:
    """Big step for an estimated score in ``[1/rho, 1 - 1/rho]``.

    Aims the estimate at ``2k / n1``.  Estimates at or below ``2k / n1``
    give 0 (no step) rather than a negative value.
    """
    if n1 <= 2 * k:
        raise InvalidDimsError(f"need n1 > 2k, got n1={n1}, k={k}")
    if not 0 < mu_hat < 1:
        raise InvalidLeverageError(f"mu_hat={mu_hat} outside (0, 1)")
    return max((n1 - 2 * k / mu_hat) / (n1 - 2 * k), 0.0)


def gamma_large(mu_hat: float, accuracy_rho: float) -> float:
    """Cautious step for an estimated score close to one.

    Treats ``mu_hat - 1/(2 rho)`` as a lower bound of the true score and
    aims it at ``1 / rho``.
    """
    rho = accuracy_rho
    lower = mu_hat - 1.0 / (2 * rho)
    if not (1 - 1 / rho < mu_hat < 1) or lower < 1.0 / rho:
        raise InvalidLeverageError(f"mu_hat={mu_hat} outside the large-score domain for rho={rho}")
    return (rho - 1.0 / lower) / (rho - 1.0)


def medium_upper_bound(n1: int, k: int, accuracy_rho: float) -> float:
    """Explicit upper bound on the true score after a medium step."""
    rho = accuracy_rho
    a = 4 * k / n1
    return a * (rho - 0.5) ** 2 / ((rho - 1) ** 2 - a * rho * (rho - 0.5))


def line_search_step(
    p: LeverageProfile, i: int, q, targets: TargetScores, grid: int = 100
) -> float:
    """Step size for row ``i`` under the lq hinge loss.

    ``q=1`` uses the closed form that lands ``mu_i`` on its target (the l1
    steepest step).  ``q=2`` and ``q=inf`` return the minimiser over
    ``gamma in {1/grid, ..., (grid-1)/grid}``.  Returns 0 when no step
    strictly lowers the loss.
    """
    cross = p.require_cross()
    mu_i = float(cross[i, i])
    target = float(targets.values[i])
    if targets.abandoned[i] or mu_i <= target:
        return 0.0
    if q == 1:
        if mu_i >= 1.0:
            mu_i = np.nextafter(1.0, 0.0)
        if target <= 0.0:
            return 0.0
        return gamma_exact(mu_i, target)
    if q not in (2, INF):
        raise InvalidInputError("q must be 1, 2 or inf")
    gammas = np.arange(1, grid) / grid
    if mu_i >= 1.0:
        gammas = gammas[gammas * mu_i < 1.0]
    losses = _reduce(_excess(rank_one_scores(p, i, gammas), targets), q)
    current = hinge_loss(p, targets, q)
    best = int(np.argmin(losses))
    if losses[best] < current - 1e-12 * max(current, 1.0):
        return float(gammas[best])
    return 0.0


# --------------------------------------------------------------------------
# traces

@dataclass
class WeightingTrace:
    """Per-step diagnostics; row 0 is the state before any weighting."""

    records: list = field(default_factory=list)

    def append(self, **row):
        self.records.append(row)

    @property
    def steps(self) -> int:
        return max(len(self.records) - 1, 0)

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.records])

    @property
    def columns(self) -> list:
        return list(self.records[0]) if self.records else []

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=self.columns)
            w.writeheader()
            for r in self.records:
                w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in r.items()})


# --------------------------------------------------------------------------
# estimated-leverage coordinate descent

def _bases_for(data, k, cfg: WeightingConfig) -> np.ndarray:
    if isinstance(data, SparseObservation):
        if data.nnz == 0:
            raise DegenerateObservationError("no observed entries")
        data = trim(data, cfg.trim_mode, cfg.seed).to_dense()
    f = condensed_svd(np.asarray(data, dtype=float))
    if f.rank < k:
        raise DegenerateObservationError(f"input has rank {f.rank} < k={k}")
    return scaled_bases(f)


def _profile_of(bases: np.ndarray, weights: np.ndarray, k: int):
    f = truncated_svd(weights[:, None] * bases, k, method="dense")
    s = f.singular_values
    kappa = float(s[0] / s[k - 1]) if s[k - 1] > 0 else INF
    return compute_leverage(f, k), kappa


def _choose_gamma(mu_hat: float, n1: int, k: int, rho: float) -> float:
    if mu_hat >= 1.0:
        mu_hat = 1.0 - 1.0 / (2 * rho)
    if mu_hat > 1.0 - 1.0 / rho:
        try:
            return gamma_large(mu_hat, rho)
        except InvalidLeverageError:
            pass
    return gamma_medium(mu_hat, n1, k)


def coordinate_descent(
    data: Union[SparseObservation, np.ndarray],
    k: int,
    cfg: WeightingConfig = WeightingConfig(),
    targets: Optional[TargetScores] = None,
    reference: Optional[np.ndarray] = None,
) -> tuple[DiagonalWeights, WeightingTrace]:
    """Row weights from estimated leverage scores.

    ``data`` is either a sampled observation (trimmed first) or a dense
    matrix.  Each step takes the rank-k leverage of the currently weighted
    input, picks the largest estimated score ``>= 1/rho`` (ties to the
    smallest index), and shrinks that row with the medium or large rule.
    Stops when no row qualifies, when the chosen step is zero, or after
    ``cfg.max_steps`` (default ``k**2``) steps.

    The input is replaced by ``U S`` from its condensed SVD, which leaves the
    rank-k leverage of every row-weighted version unchanged.

    If ``reference`` (the true matrix) is given, the trace also records its
    exact coherence, l1 loss and condition number under the current weights.
    """
    n1, n2 = data.shape
    if not 1 <= k <= min(n1, n2):
        raise InvalidRankError(f"k={k} outside [1, {min(n1, n2)}]")
    targets = target_scores_uniform(n1, k) if targets is None else targets
    if len(targets) != n1:
        raise InvalidInputError("targets length differs from row count")
    rho = cfg.accuracy_rho
    bases = _bases_for(data, k, cfg)
    ref_bases = None if reference is None else scaled_bases(condensed_svd(reference))
    w = np.where(targets.abandoned, 0.0, 1.0)
    active = ~targets.abandoned
    trace = WeightingTrace()

    def record(step, row, gamma, profile, kappa):
        entry = dict(
            step=step,
            chosen_row=row,
            gamma=gamma,
            coherence=coherence(profile),
            l1_loss=hinge_loss(profile, targets, 1),
            kappa=kappa,
        )
        if ref_bases is not None:
            true_profile, true_kappa = _profile_of(ref_bases, w, k)
            entry.update(
                true_coherence=coherence(true_profile),
                true_l1_loss=hinge_loss(true_profile, targets, 1),
                true_kappa=true_kappa,
            )
        trace.append(**entry)

    profile, kappa = _profile_of(bases, w, k)
    record(0, -1, 0.0, profile, kappa)
    for step in range(1, cfg.steps_for(k) + 1):
        mu_hat = np.where(active, profile.scores, -np.inf)
        i = int(np.argmax(mu_hat))
        if not mu_hat[i] >= 1.0 / rho:
            break
        gamma = _choose_gamma(float(mu_hat[i]), n1, k, rho)
        if gamma <= 0.0:
            break
        w[i] *= math.sqrt(1.0 - gamma)
        profile, kappa = _profile_of(bases, w, k)
        record(step, i, gamma, profile, kappa)
    return DiagonalWeights(w, targets.abandoned.copy()), trace


# --------------------------------------------------------------------------
# exact-leverage coordinate descent

StepCallback = Callable[[int, int, float, LeverageProfile, LeverageProfile], None]


def coordinate_descent_exact(
    matrix: np.ndarray,
    k: int,
    targets: Optional[TargetScores] = None,
    step_q=1,
    max_steps: Optional[int] = None,
    refresh_period: int = 50,
    grid: int = 100,
    on_step: Optional[StepCallback] = None,
) -> tuple[DiagonalWeights, WeightingTrace]:
    """Coordinate descent with exact leverage scores and lq step sizes.

    Scores are propagated with closed-form rank-one updates and refreshed
    from an SVD of the weighted matrix every ``refresh_period`` updates.
    Each step tries violators in order of decreasing excess and takes the
    first with a nonzero lq step (``step_q`` in {1, 2, inf}); it stops when
    none exists.  The trace records the l1, l2 and l-inf losses after every
    step.  ``on_step(t, i, gamma, before, after)`` sees the profiles on
    both sides of each update.
    """
    matrix = np.asarray(matrix, dtype=float)
    n1 = matrix.shape[0]
    targets = target_scores_uniform(n1, k) if targets is None else targets
    bases = scaled_bases(condensed_svd(matrix))
    if bases.shape[1] < k:
        raise InvalidRankError(f"matrix rank {bases.shape[1]} below k={k}")
    max_steps = k * k if max_steps is None else max_steps
    w = np.where(targets.abandoned, 0.0, 1.0)

    def fresh():
        f = truncated_svd(w[:, None] * bases, k, method="dense")
        return compute_leverage(f, k, with_cross=True)

    profile = fresh()
    trace = WeightingTrace()

    def record(step, row, gamma):
        trace.append(
            step=step,
            chosen_row=row,
            gamma=gamma,
            coherence=coherence(profile),
            l1_loss=hinge_loss(profile, targets, 1),
            l2_loss=hinge_loss(profile, targets, 2),
            linf_loss=hinge_loss(profile, targets, INF),
        )

    record(0, -1, 0.0)
    since_refresh = 0
    for step in range(1, max_steps + 1):
        excess = _excess(profile.scores, targets)
        order = [int(j) for j in np.argsort(-excess, kind="stable") if excess[j] > 0]
        chosen = None
        for i in order:
            gamma = line_search_step(profile, i, step_q, targets, grid)
            if gamma > 0.0:
                chosen = (i, gamma)
                break
        if chosen is None:
            break
        i, gamma = chosen
        before = profile
        profile = rank_one_update(profile, i, gamma)
        w[i] *= math.sqrt(1.0 - gamma)
        since_refresh += 1
        if on_step is not None:
            on_step(step, i, gamma, before, profile)
        if since_refresh >= refresh_period:
            profile = fresh()
            since_refresh = 0
        record(step, i, gamma)
    return DiagonalWeights(w, targets.abandoned.copy()), trace
