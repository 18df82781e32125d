"""Robust L2,1-loss semi-nonnegative factorization.

Approximates a mixed-sign matrix ``X`` (m x n, columns are data points) as
``W @ H`` with ``W`` (m x k) unconstrained and ``H`` (k x n) entrywise
nonnegative, minimizing

    ||X - W H||_{2,1}  +  (alpha / 2) * ||W||_F^2        with  H >= 0.

The solver alternates two updates derived from a column-reweighted
quadratic surrogate of the robust loss:

* ``W`` has a closed form: the ridge-regularized weighted least-squares
  solution ``W = (X D H^T) (alpha I + H D H^T)^{-1}``, where ``D`` is the
  diagonal of inverse column residual norms (the IRLS weights).
* ``H`` follows a multiplicative rule built from the sign-split parts of
  ``W^T W`` and ``W^T X``; it preserves nonnegativity and never revives an
  exactly zero entry.

In ``"gauss-seidel"`` order (default) the weights are refreshed between the
two half-steps, which makes the logged objective provably non-increasing.
``"jacobi"`` order computes the weights once per iteration and feeds both
updates from the iteration-entry state; it is kept for fidelity with the
classical statement of the method and carries no descent guarantee here.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .linalg import (
    check_matrix,
    column_norms,
    frobenius_norm,
    l21_norm,
    make_rng,
    split_pos_neg,
    solve_spd,
)
from .metrics import LossHistory, LossRecord

__all__ = [
    "NumericalError",
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
]

UPDATE_ORDERS = ("gauss-seidel", "jacobi")


class NumericalError(RuntimeError):
    """The iteration produced a non-finite objective or no trial succeeded."""


@dataclass
class FactorizationState:
    """A factorization snapshot: factors, iteration count, residual norms.

    ``residual_norms[j]`` is the Euclidean norm of column ``j`` of
    ``X - W @ H`` at the time the state was taken; it is ``None`` for
    initial states built without reference to a data matrix.
    """

    W: np.ndarray
    H: np.ndarray
    iteration: int
    residual_norms: Optional[np.ndarray] = None

    def reconstruct(self) -> np.ndarray:
        return self.W @ self.H


@dataclass
class FitReport:
    """Everything a solver run produced."""

    state: FactorizationState
    history: LossHistory
    wall_time_s: float


def objective(X, W, H, alpha):
    """Robust objective: ``||X - W H||_{2,1} + (alpha / 2) * ||W||_F^2``.

    The ridge term reads the regularizer as the squared Frobenius norm of
    ``W``; the factor 1/2 pairs with the weight ``alpha`` used inside the
    W update so that both optimize the same function.
    """
    X = np.asarray(X, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    if W.shape[0] != X.shape[0] or H.shape[1] != X.shape[1] or W.shape[1] != H.shape[0]:
        raise ValueError(
            f"shape mismatch: X{X.shape}, W{W.shape}, H{H.shape}"
        )
    ridge = 0.5 * alpha * float(np.einsum("ij,ij->", W, W))
    return l21_norm(X - W @ H) + ridge


def compute_d(X, W, H, eps_residual=1e-8):
    """Inverse column residual norms: ``d[j] = 1 / max(||x_j - W h_j||, eps)``.

    The floor keeps the weights finite when a column is reconstructed
    exactly, where the inverse norm would blow up.
    """
    R = X - W @ H
    return 1.0 / np.maximum(column_norms(R), eps_residual)


def step_w(X, H, d, alpha):
    """Closed-form W update: ``(X D H^T) (alpha I + H D H^T)^{-1}``.

    Solved as an SPD system rather than by forming the inverse. With
    ``alpha > 0`` the system is positive definite by construction; with
    ``alpha = 0`` it is only as good as ``H D H^T``.
    """
    Hd = H * d
    A = Hd @ H.T
    A[np.diag_indices_from(A)] += alpha
    B = X @ Hd.T
    # B is scratch, so the solve may reuse its storage; return row-major
    # so downstream products stay on the fast path
    return np.ascontiguousarray(solve_spd(A, B.T, overwrite_b=True).T)


def step_h(X, W, H, d, eps_denominator=1e-12):
    """Multiplicative H update from the sign-split normal quantities.

    With ``Phi = W^T X`` and ``Omega = W^T W`` split into positive and
    negative parts, each entry is scaled by

        sqrt( (Phi+ D + Omega- H D) / (Phi- D + Omega+ H D) )

    elementwise. The denominator is floored at ``eps_denominator`` before
    dividing. Entries of ``H`` that are exactly zero stay zero.
    """
    Phi = W.T @ X
    Omega = W.T @ W
    Phi_p, Phi_n = split_pos_neg(Phi)
    Om_p, Om_n = split_pos_neg(Omega)
    num = (Phi_p + Om_n @ H) * d
    den = (Phi_n + Om_p @ H) * d
    return H * np.sqrt(num / np.maximum(den, eps_denominator))


def proxy_loss(X, W, H, d, alpha):
    """Weighted quadratic surrogate: ``tr[(X-WH) D (X-WH)^T] + alpha tr[W^T W]``.

    This is the function the W update minimizes exactly at fixed ``(H, d)``.
    """
    R = X - W @ H
    weighted = float(np.einsum("ij,ij->j", R, R) @ np.asarray(d, dtype=np.float64))
    return weighted + alpha * float(np.einsum("ij,ij->", W, W))


def truncated_proxy_loss(X, W, H, d):
    """The surrogate without its ridge term; the function the H update descends."""
    return proxy_loss(X, W, H, d, 0.0)


def auxiliary_value(H, Hprime, X, W, d):
    """Value of the majorizer ``A(H, H')`` of the truncated surrogate.

    ``A`` upper-bounds ``truncated_proxy_loss`` in its first argument and
    touches it at ``H == H'``; the multiplicative H update is the exact
    minimizer of ``A(., H')``. Used as a test oracle, not in the solver.

    Both ``H`` and ``Hprime`` must be strictly positive: ``H'`` appears in
    denominators, and the bound evaluates ``log(H / H')``.
    """
    H = np.asarray(H, dtype=np.float64)
    Hprime = np.asarray(Hprime, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if np.any(Hprime <= 0.0):
        raise ValueError("Hprime must be strictly positive")
    if np.any(H <= 0.0):
        raise ValueError("H must be strictly positive (log of a ratio is taken)")
    Phi = W.T @ X
    Omega = W.T @ W
    Phi_p, Phi_n = split_pos_neg(Phi)
    Om_p, Om_n = split_pos_neg(Omega)

    t_const = float(np.einsum("ij,ij->j", X, X) @ d)
    t_neg_lin = float(np.sum((Phi_n * d) * (H * H + Hprime * Hprime) / Hprime))
    t_quad = float(np.sum(((Om_p @ Hprime) * d) * H * H / Hprime))
    L = np.log(H) - np.log(Hprime)
    t_pos_lin = -2.0 * float(np.sum((Phi_p * d) * Hprime * (1.0 + L)))
    V = Om_n @ Hprime
    base = np.einsum("ij,ij->j", Hprime, V)
    left = np.einsum("ij,ij->j", Hprime * L, V)
    right = np.einsum("ij,ij->j", Hprime, Om_n @ (Hprime * L))
    t_neg_quad = -float((base + left + right) @ d)
    return t_const + t_neg_lin + t_quad + t_pos_lin + t_neg_quad


def kkt_residual(X, W, H, d):
    """Max complementary-slackness violation of the nonnegativity constraint.

    Returns ``max_ij | H_ij^2 * G_ij |`` where ``G`` is the sign-split
    gradient ``(-Phi+ + Phi- + Omega+ H - Omega- H) D`` of the truncated
    surrogate. Zero at a stationary point; a convergence diagnostic.
    """
    Phi = W.T @ X
    Omega = W.T @ W
    Phi_p, Phi_n = split_pos_neg(Phi)
    Om_p, Om_n = split_pos_neg(Omega)
    G = (Phi_n - Phi_p + (Om_p - Om_n) @ H) * d
    return float(np.max(np.abs(H * H * G)))


def fit_factorization(
    X,
    W0,
    H0,
    *,
    alpha=0.0,
    max_iter=100,
    eps_residual=1e-8,
    eps_denominator=1e-12,
    update_order="gauss-seidel",
    reweight=True,
    tol=None,
    callback: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None,
) -> FitReport:
    """Run the alternating solver from an explicit initial state.

    ``reweight=False`` freezes the column weights at one and drops the
    ridge term's effect on logging, which turns the identical update pair
    into the classical Frobenius-loss semi-NMF; the logged objective is
    then the squared Frobenius error.

    The history gets one record for the initial state and one after each
    full iteration (H update then W update). ``callback(t, W, H)`` is
    invoked at the same points with live arrays; copy them to keep them.
    ``tol``, if set, stops early once the relative objective decrease falls
    below it; the default replicates the fixed iteration budget.
    """
    X = check_matrix(X, "X")
    W = check_matrix(W0, "W0").copy()
    H = check_matrix(H0, "H0").copy()
    m, n = X.shape
    k = W.shape[1]
    if W.shape[0] != m or H.shape != (k, n):
        raise ValueError(f"shape mismatch: X{X.shape}, W0{W.shape}, H0{H.shape}")
    if np.any(H <= 0.0):
        raise ValueError(
            "initial H must be strictly positive: exact zeros are absorbing "
            "under the multiplicative update and freeze coordinates forever"
        )
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if eps_residual <= 0 or eps_denominator <= 0:
        raise ValueError("eps floors must be strictly positive")
    if max_iter < 0:
        raise ValueError(f"max_iter must be >= 0, got {max_iter}")
    if update_order not in UPDATE_ORDERS:
        raise ValueError(f"update_order must be one of {UPDATE_ORDERS}")

    x_fro = frobenius_norm(X)
    x_l21 = l21_norm(X)
    if x_fro == 0.0:
        raise ValueError("X must be nonzero")

    ones = np.ones(n)
    R = np.empty_like(X)

    def residual_norms():
        np.matmul(W, H, out=R)
        np.subtract(X, R, out=R)
        return np.sqrt(np.einsum("ij,ij->j", R, R))

    history = LossHistory()

    def log(t, r):
        if reweight:
            obj = float(r.sum()) + 0.5 * alpha * float(np.einsum("ij,ij->", W, W))
        else:
            obj = float(r @ r)
        if not np.isfinite(obj):
            raise NumericalError(
                f"objective became non-finite at iteration {t}; the factors "
                "have likely overflowed (check alpha and the eps floors)"
            )
        history.append(
            LossRecord(t, obj, nfl=float(np.sqrt(r @ r)) / x_fro, nl21=float(r.sum()) / x_l21)
        )

    start = time.perf_counter()
    r = residual_norms()
    log(0, r)
    if callback is not None:
        callback(0, W, H)

    performed = 0
    for t in range(1, max_iter + 1):
        d = 1.0 / np.maximum(r, eps_residual) if reweight else ones
        if update_order == "jacobi":
            H_new = step_h(X, W, H, d, eps_denominator)
            W = step_w(X, H, d, alpha)
            H = H_new
        else:
            H = step_h(X, W, H, d, eps_denominator)
            if reweight:
                # refresh the weights against the new H before the W update;
                # with frozen weights the refresh could not change d
                r = residual_norms()
                d = 1.0 / np.maximum(r, eps_residual)
            W = step_w(X, H, d, alpha)
        r = residual_norms()
        log(t, r)
        performed = t
        if callback is not None:
            callback(t, W, H)
        if tol is not None and len(history) >= 2:
            prev = history[-2].objective
            cur = history[-1].objective
            if abs(prev - cur) <= tol * max(abs(prev), 1e-300):
                break

    wall = time.perf_counter() - start
    state = FactorizationState(W=W, H=H, iteration=performed, residual_norms=r)
    return FitReport(state=state, history=history, wall_time_s=wall)


class L21SNF(TransformerMixin, BaseEstimator):
    """Robust semi-nonnegative factorization of a mixed-sign matrix.

    The input ``X`` is an ``(m, n)`` array whose *columns* are data points;
    ``fit`` learns a mixed-sign basis ``basis_`` of shape ``(m, rank)`` and
    nonnegative coordinates ``coefficients_`` of shape ``(rank, n)``.
    Compression comes from choosing ``rank < min(m, n)``.

    Parameters
    ----------
    rank : int
        Number of basis columns.
    alpha : float
        Ridge weight on the basis; the objective carries ``alpha / 2``.
    max_iter : int
        Fixed iteration budget (no tolerance-based stopping by default).
    eps_residual : float
        Floor on column residual norms inside the reweighting.
    eps_denominator : float
        Floor on the multiplicative update's denominator.
    update_order : {"gauss-seidel", "jacobi"}
        Whether the W update sees the just-updated H and refreshed weights
        (descent-guaranteed) or the iteration-entry quantities.
    init : {"kmeans", "random", "custom"}
        Initialization strategy. ``"kmeans"`` clusters the columns and
        starts H at 1.2/0.2 membership values; ``"custom"`` uses the
        ``W``/``H`` arguments of :meth:`fit`.
    tol : float or None
        Optional early-stopping threshold on the relative objective
        decrease; ``None`` (default) always runs ``max_iter`` iterations.
    random_state : int
        Seed for the initialization.

    Attributes
    ----------
    basis_ : ndarray of shape (m, rank)
    coefficients_ : ndarray of shape (rank, n)
    history_ : LossHistory
    n_iter_ : int
    report_ : FitReport
    """

    def __init__(
        self,
        rank=2,
        alpha=0.0,
        max_iter=100,
        eps_residual=1e-8,
        eps_denominator=1e-12,
        update_order="gauss-seidel",
        init="kmeans",
        tol=None,
        random_state=0,
    ):
        self.rank = rank
        self.alpha = alpha
        self.max_iter = max_iter
        self.eps_residual = eps_residual
        self.eps_denominator = eps_denominator
        self.update_order = update_order
        self.init = init
        self.tol = tol
        self.random_state = random_state

    _reweight = True

    def _objective_alpha(self):
        return self.alpha

    def _initial_state(self, X, W, H):
        from .init import init_from_kmeans, random_init

        if self.init == "custom":
            if W is None or H is None:
                raise ValueError("init='custom' requires both W and H")
            return np.asarray(W, dtype=np.float64), np.asarray(H, dtype=np.float64)
        if W is not None or H is not None:
            raise ValueError("W/H are only accepted with init='custom'")
        rng = make_rng(self.random_state)
        if self.init == "kmeans":
            state = init_from_kmeans(X, self.rank, rng)
        elif self.init == "random":
            state = random_init(X.shape[0], X.shape[1], self.rank, rng)
        else:
            raise ValueError(f"unknown init {self.init!r}")
        return state.W, state.H

    def fit(self, X, y=None, W=None, H=None):
        """Learn the factorization of ``X``; returns ``self``."""
        X = check_matrix(X, "X")
        m, n = X.shape
        if not 1 <= self.rank <= min(m, n):
            raise ValueError(
                f"rank must be in [1, min(m, n)] = [1, {min(m, n)}], got {self.rank}"
            )
        W0, H0 = self._initial_state(X, W, H)
        report = fit_factorization(
            X,
            W0,
            H0,
            alpha=self._objective_alpha(),
            max_iter=self.max_iter,
            eps_residual=self.eps_residual,
            eps_denominator=self.eps_denominator,
            update_order=self.update_order,
            reweight=self._reweight,
            tol=self.tol,
        )
        self.report_ = report
        self.basis_ = report.state.W
        self.coefficients_ = report.state.H
        self.history_ = report.history
        self.n_iter_ = report.state.iteration
        return self

    def fit_transform(self, X, y=None, W=None, H=None):
        """Fit and return the nonnegative coordinates ``coefficients_``."""
        return self.fit(X, y=y, W=W, H=H).coefficients_

    def _check_fitted(self):
        if not hasattr(self, "basis_"):
            raise NotFittedError("this estimator has not been fitted yet")

    def transform(self, X):
        """Nonnegative coordinates of new columns against the frozen basis.

        Runs the multiplicative coordinate update (basis fixed, weights
        refreshed each pass) from a constant positive start for
        ``max_iter`` passes.
        """
        self._check_fitted()
        X = check_matrix(X, "X")
        W = self.basis_
        if X.shape[0] != W.shape[0]:
            raise ValueError(
                f"X has {X.shape[0]} rows, the fitted basis has {W.shape[0]}"
            )
        H = np.full((W.shape[1], X.shape[1]), 1.0)
        for _ in range(self.max_iter):
            if self._reweight:
                d = compute_d(X, W, H, self.eps_residual)
            else:
                d = np.ones(X.shape[1])
            H = step_h(X, W, H, d, self.eps_denominator)
        return H

    def inverse_transform(self, H):
        """Reconstruction ``basis_ @ H`` of columns from their coordinates."""
        self._check_fitted()
        H = np.asarray(H, dtype=np.float64)
        return self.basis_ @ H

    def reconstruct(self):
        """Reconstruction of the fitted matrix, ``basis_ @ coefficients_``."""
        self._check_fitted()
        return self.basis_ @ self.coefficients_
