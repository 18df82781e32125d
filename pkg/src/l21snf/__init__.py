"""Robust parts-based compression of mixed-sign matrices.

Factorizes X (columns are data points) as a mixed-sign basis times
nonnegative coordinates under a robust column-wise loss, with classical
semi-NMF and PCA baselines and a reproducible benchmark CLI.
"""

from .linalg import (
    NotPositiveDefiniteError,
    frobenius_norm,
    l21_norm,
    make_rng,
    solve_spd,
    split_pos_neg,
    uniform_matrix,
)
from .metrics import LossHistory, LossRecord, nfl, nl21
from .solver import (
    FactorizationState,
    FitReport,
    L21SNF,
    NumericalError,
    auxiliary_value,
    compute_d,
    fit_factorization,
    kkt_residual,
    objective,
    proxy_loss,
    step_h,
    step_w,
    truncated_proxy_loss,
)
from .baselines import PCA, SemiNMF, reconstruct
from .init import KmeansResult, init_from_kmeans, kmeans, random_init
from .tuning import AlphaSearchResult, AlphaTrial, search_alpha

__version__ = "0.1.0"

__all__ = [
    "NotPositiveDefiniteError",
    "NumericalError",
    "make_rng",
    "uniform_matrix",
    "l21_norm",
    "frobenius_norm",
    "split_pos_neg",
    "solve_spd",
    "LossRecord",
    "LossHistory",
    "nfl",
    "nl21",
    "FactorizationState",
    "FitReport",
    "objective",
    "compute_d",
    "step_w",
    "step_h",
    "proxy_loss",
    "truncated_proxy_loss",
    "auxiliary_value",
    "kkt_residual",
    "fit_factorization",
    "L21SNF",
    "SemiNMF",
    "PCA",
    "reconstruct",
    "KmeansResult",
    "kmeans",
    "init_from_kmeans",
    "random_init",
    "AlphaTrial",
    "AlphaSearchResult",
    "search_alpha",
    "__version__",
]
