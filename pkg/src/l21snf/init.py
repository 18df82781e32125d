"""Column-clustering and random initialization of the factor pair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import check_matrix
from .solver import FactorizationState

__all__ = ["KmeansResult", "kmeans", "init_from_kmeans", "random_init"]

KMEANS_INIT_ITERS = 5
H_MEMBER = 1.2
H_OTHER = 0.2


@dataclass
class KmeansResult:
    centroids: np.ndarray  # (m, k), one centroid per column
    assignment: np.ndarray  # (n,), cluster index of every data column


def _sq_distances(C, X):
    # (k, n) squared Euclidean distances between centroids and columns
    x2 = np.einsum("ij,ij->j", X, X)
    c2 = np.einsum("ij,ij->j", C, C)
    return x2[None, :] - 2.0 * (C.T @ X) + c2[:, None]


def kmeans(X, k, iters, rng) -> KmeansResult:
    """Lloyd's algorithm on the columns of ``X`` with Euclidean distances.

    Centroids start as ``k`` distinct random columns. An empty cluster is
    re-seeded at the point currently farthest from its assigned centroid
    (ties and repeats broken deterministically). ``iters=0`` returns the
    sampled columns and their nearest-column assignment unchanged.
    """
    X = check_matrix(X, "X")
    n = X.shape[1]
    if k > n:
        raise ValueError(f"k={k} exceeds the number of columns n={n}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if iters < 0:
        raise ValueError(f"iters must be >= 0, got {iters}")
    idx = rng.choice(n, size=k, replace=False)
    C = X[:, idx].copy()
    cols = np.arange(n)
    for _ in range(iters):
        d2 = _sq_distances(C, X)
        labels = np.argmin(d2, axis=0)
        dmin = d2[labels, cols].copy()
        for c in range(k):
            members = labels == c
            if members.any():
                C[:, c] = X[:, members].mean(axis=1)
            else:
                far = int(np.argmax(dmin))
                C[:, c] = X[:, far]
                dmin[far] = -1.0  # a later empty cluster must pick another point
    labels = np.argmin(_sq_distances(C, X), axis=0)
    return KmeansResult(centroids=C, assignment=labels)


def init_from_kmeans(X, k, rng) -> FactorizationState:
    """Cluster-based starting point: centroid basis, 1.2/0.2 membership coordinates.

    Runs five Lloyd iterations, sets ``W`` to the centroids, and sets
    ``H[i, j]`` to 1.2 when column ``j`` belongs to cluster ``i`` and 0.2
    otherwise, so ``H`` starts strictly positive.
    """
    X = check_matrix(X, "X")
    result = kmeans(X, k, KMEANS_INIT_ITERS, rng)
    n = X.shape[1]
    H = np.full((k, n), H_OTHER)
    H[result.assignment, np.arange(n)] = H_MEMBER
    W = result.centroids.copy()
    r = np.sqrt(np.einsum("ij,ij->j", X - W @ H, X - W @ H))
    return FactorizationState(W=W, H=H, iteration=0, residual_norms=r)


def random_init(m, n, k, rng) -> FactorizationState:
    """Random starting point: W uniform on [-1, 1), H uniform on (0.1, 1.1].

    H is strictly positive by construction (1.1 minus a [0, 1) draw).
    """
    if m < 1 or n < 1 or k < 1:
        raise ValueError(f"dimensions must be >= 1, got m={m}, n={n}, k={k}")
    W = -1.0 + 2.0 * rng.random((m, k))
    H = 1.1 - rng.random((k, n))
    return FactorizationState(W=W, H=H, iteration=0)
