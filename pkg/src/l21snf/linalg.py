"""Dense matrix primitives: validation, seeded generation, norms, splits, SPD solves.

All matrices are 2-D float64 arrays in C (row-major) order. Columns are the
natural unit throughout the package: a column is one data point.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

__all__ = [
    "NotPositiveDefiniteError",
    "make_rng",
    "check_matrix",
    "check_weights",
    "uniform_matrix",
    "column_norms",
    "l21_norm",
    "frobenius_norm",
    "split_pos_neg",
    "solve_spd",
]


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """A symmetric system could not be Cholesky-factorized, even after jitter."""


def make_rng(seed):
    """Return a seeded ``numpy.random.Generator`` backed by PCG64.

    PCG64 is a fixed, documented algorithm whose stream depends only on the
    seed, so the same seed replays the same scalars on every platform. One
    generator per thread of control; generators are never shared.
    """
    return np.random.Generator(np.random.PCG64(seed))


def check_matrix(M, name="matrix"):
    """Validate ``M`` as a nonempty 2-D float64 C-order array with finite entries."""
    M = np.ascontiguousarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={M.ndim}")
    if M.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return M


def check_weights(d, n, name="d"):
    """Validate ``d`` as a length-``n`` vector of strictly positive finite reals."""
    d = np.ascontiguousarray(d, dtype=np.float64)
    if d.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {d.shape}")
    if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
        raise ValueError(f"{name} entries must be strictly positive and finite")
    return d


def uniform_matrix(rows, cols, low, high, rng):
    """Matrix with i.i.d. entries uniform on ``[low, high)``, deterministic per seed."""
    if rows < 1 or cols < 1:
        raise ValueError(f"rows and cols must be >= 1, got {rows}x{cols}")
    if not low < high:
        raise ValueError(f"invalid bounds: low={low} must be < high={high}")
    M = low + (high - low) * rng.random((rows, cols))
    # rounding of low + (high-low)*r can land exactly on high; clamp back inside
    return np.minimum(M, np.nextafter(high, low))


def column_norms(M):
    """Euclidean norm of every column, as a 1-D vector."""
    M = np.asarray(M, dtype=np.float64)
    return np.sqrt(np.einsum("ij,ij->j", M, M))


def l21_norm(M):
    """Sum of the Euclidean norms of the columns of ``M``.

    Robust aggregate: each column contributes linearly, so a single bad
    column cannot dominate the way it does under a squared loss.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.size == 0:
        raise ValueError("l21_norm expects a nonempty 2-D array")
    return float(column_norms(M).sum())


def frobenius_norm(M):
    """Square root of the sum of squared entries of ``M``."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.size == 0:
        raise ValueError("frobenius_norm expects a nonempty 2-D array")
    return float(np.sqrt(np.einsum("ij,ij->", M, M)))


def split_pos_neg(M):
    """Split ``M`` into elementwise positive and negative parts.

    Returns ``(P, N)`` with ``P = (|M| + M) / 2`` and ``N = (|M| - M) / 2``;
    both are entrywise nonnegative, ``P - N == M`` exactly, and ``P * N == 0``.
    """
    M = np.asarray(M, dtype=np.float64)
    A = np.abs(M)
    return (A + M) / 2.0, (A - M) / 2.0


def solve_spd(A, B, overwrite_b=False):
    """Solve ``A @ Y = B`` for symmetric positive definite ``A``.

    Uses a Cholesky factorization. If the factorization fails (A only
    positive semidefinite, e.g. a rank-deficient normal matrix with no ridge
    term), retries once after adding ``1e-10 * trace(A) / k`` to the
    diagonal, then raises :class:`NotPositiveDefiniteError`.

    ``overwrite_b=True`` lets the solve reuse ``B``'s storage when ``B`` is
    scratch the caller no longer needs; it does not change the result.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got {A.shape}")
    if B.shape[0] != A.shape[0]:
        raise ValueError(f"B has {B.shape[0]} rows, expected {A.shape[0]}")
    try:
        c = cho_factor(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        k = A.shape[0]
        jitter = 1e-10 * float(np.trace(A)) / k
        Aj = A + jitter * np.eye(k)
        try:
            c = cho_factor(Aj, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(
                f"matrix of shape {A.shape} is not positive definite "
                f"(jitter {jitter:g} did not help)"
            ) from exc
    return cho_solve(c, B, overwrite_b=overwrite_b, check_finite=False)
