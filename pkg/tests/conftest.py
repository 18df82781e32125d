import numpy as np

from l21snf.linalg import make_rng, uniform_matrix


def random_instance(rng, m=None, n=None, k=None, low=-20.0, high=20.0):
    """A random mixed-sign matrix with a strictly positive factor pair."""
    m = m if m is not None else int(rng.integers(5, 51))
    n = n if n is not None else int(rng.integers(4, 41))
    k = k if k is not None else int(rng.integers(1, min(9, n + 1)))
    X = uniform_matrix(m, n, low, high, rng)
    W = uniform_matrix(m, k, -1, 1, rng)
    H = 1.1 - rng.random((k, n))
    return X, W, H


def clustered_rank_k(m, n, k, seed):
    """Exactly rank-k matrix with balanced cluster structure.

    Columns repeat k prototype vectors through strictly positive 1.2/0.2
    membership coordinates, so the cluster-based initializer starts next to
    a factorization with zero residual.
    """
    rng = make_rng(seed)
    W0 = uniform_matrix(m, k, -1, 1, rng)
    assign = np.arange(n) % k
    H0 = np.full((k, n), 0.2)
    H0[assign, np.arange(n)] += 1.0
    return W0 @ H0, W0, H0
