"""Leverage-score row/column weighting for coherent low-rank recovery.

Estimate leverage scores from sampled entries, flatten them with diagonal
row and column weights found by coordinate descent, then recover the
matrix by weighted nuclear-norm completion or weighted robust PCA.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .linalg import (
    SparseObservation,
    SvdFactors,
    condensed_svd,
    condition_number,
    read_dense_csv,
    read_observation,
    truncated_svd,
    write_dense_csv,
    write_observation,
)
from .leverage import (
    EstimationParams,
    LeverageProfile,
    coherence,
    compute_leverage,
    estimate_leverage,
    leverage_of,
    rank_one_update,
    reduce_to_bases,
    scaled_bases,
    trim,
)
from .weighting import (
    DiagonalWeights,
    TargetScores,
    WeightingConfig,
    coordinate_descent,
    coordinate_descent_exact,
    gamma_exact,
    gamma_large,
    gamma_medium,
    hinge_loss,
    line_search_step,
    target_scores_from_marginals,
    target_scores_uniform,
)
from .completion import (
    AdmmConfig,
    RecoveryResult,
    admm_weighted_complete,
    lambda_grid,
    relative_error,
    singular_value_threshold,
    weighting_completion,
)
from .rpca import RpcaConfig, RpcaResult, rpca, weighted_rpca
from .datagen import (
    GenSpec,
    add_gaussian_noise,
    gen_coherent_lowrank,
    gen_sparse_corruption,
    sample_uniform,
)
