"""Comparison algorithms: Frobenius-loss semi-NMF and truncated-SVD PCA."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .linalg import check_matrix
from .metrics import LossHistory, LossRecord, nfl, nl21
from .solver import FactorizationState, L21SNF

__all__ = ["SemiNMF", "PCA", "reconstruct"]


class SemiNMF(L21SNF):
    """Classical Frobenius-loss semi-NMF, as a configuration of the L21 kernels.

    Runs the identical update pair with the column weights frozen at one
    and no ridge term, which reduces the closed-form basis update to
    ``W = X H^T (H H^T)^{-1}`` and leaves the multiplicative coordinate
    update otherwise unchanged. Sharing the code path guarantees that any
    benchmark difference against :class:`L21SNF` comes from the loss being
    optimized, nothing else. The logged objective is the squared Frobenius
    error.
    """

    _reweight = False

    def __init__(
        self,
        rank=2,
        max_iter=100,
        eps_denominator=1e-12,
        update_order="gauss-seidel",
        init="kmeans",
        tol=None,
        random_state=0,
    ):
        super().__init__(
            rank=rank,
            alpha=0.0,
            max_iter=max_iter,
            eps_denominator=eps_denominator,
            update_order=update_order,
            init=init,
            tol=tol,
            random_state=random_state,
        )

    def _objective_alpha(self):
        return 0.0


class PCA(TransformerMixin, BaseEstimator):
    """Rank-k truncated SVD of the (by default) column-centered matrix.

    Columns of ``X`` are data points; the mean over columns is removed per
    row before the SVD unless ``center=False``. Among all rank-k-plus-mean
    reconstructions this is the Frobenius-optimal one on the centered data.

    Attributes
    ----------
    mean_ : ndarray of shape (m,)
        Per-row mean over the columns (zeros when ``center=False``).
    basis_ : ndarray of shape (m, rank)
        Orthonormal directions.
    scores_ : ndarray of shape (rank, n)
        Coordinates of the (centered) columns in the basis.
    """

    def __init__(self, rank=2, center=True):
        self.rank = rank
        self.center = center

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        m, n = X.shape
        if not 1 <= self.rank <= min(m, n):
            raise ValueError(
                f"rank must be in [1, min(m, n)] = [1, {min(m, n)}], got {self.rank}"
            )
        if self.center:
            mean = X.mean(axis=1)
        else:
            mean = np.zeros(m)
        Xc = X - mean[:, None]
        U, s, Vt = np.linalg.svd(Xc, full_matrices=False)
        k = self.rank
        basis = U[:, :k]
        scores = s[:k, None] * Vt[:k]
        # deterministic sign convention: largest-magnitude entry of each
        # direction is positive, so reruns and platforms agree bitwise
        flip = np.sign(basis[np.argmax(np.abs(basis), axis=0), np.arange(k)])
        flip[flip == 0] = 1.0
        self.mean_ = mean
        self.basis_ = basis * flip
        self.scores_ = scores * flip[:, None]
        Xhat = self.reconstruct()
        history = LossHistory()
        history.append(LossRecord(0, None, nfl=nfl(X, Xhat), nl21=nl21(X, Xhat)))
        self.history_ = history
        return self

    def _check_fitted(self):
        if not hasattr(self, "basis_"):
            raise NotFittedError("this estimator has not been fitted yet")

    def transform(self, X):
        """Coordinates of new columns in the fitted basis."""
        self._check_fitted()
        X = check_matrix(X, "X")
        return self.basis_.T @ (X - self.mean_[:, None])

    def inverse_transform(self, S):
        """Columns reconstructed from coordinates: ``basis_ @ S + mean_``."""
        self._check_fitted()
        S = np.asarray(S, dtype=np.float64)
        return self.basis_ @ S + self.mean_[:, None]

    def fit_transform(self, X, y=None):
        return self.fit(X).scores_

    def reconstruct(self):
        """Reconstruction of the fitted matrix."""
        self._check_fitted()
        return self.basis_ @ self.scores_ + self.mean_[:, None]


def reconstruct(model_or_state):
    """Reconstruction from a fitted estimator or a raw factorization state."""
    if isinstance(model_or_state, FactorizationState):
        return model_or_state.reconstruct()
    if hasattr(model_or_state, "reconstruct"):
        return model_or_state.reconstruct()
    raise TypeError(
        f"cannot reconstruct from object of type {type(model_or_state).__name__}"
    )
