"""Random-search tuning of the ridge weight."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import List, NamedTuple

from sklearn.base import clone

from .linalg import NotPositiveDefiniteError, check_matrix
from .solver import NumericalError

__all__ = ["AlphaTrial", "AlphaSearchResult", "search_alpha"]


class AlphaTrial(NamedTuple):
    alpha: float
    objective: float
    nl21: float


@dataclass
class AlphaSearchResult:
    best_alpha: float
    trials: List[AlphaTrial]


def search_alpha(X, estimator, trials, rng) -> AlphaSearchResult:
    """Random search for the ridge weight over [0, 1).

    Each trial clones ``estimator`` (so every run starts from the identical
    seeded initialization and only the ridge weight varies), fits it, and
    records the final objective and normalized robust loss. The winner is
    the trial with the smallest final normalized robust loss: final
    objectives at different ridge weights are not comparable, the
    normalized loss is. Trials that fail numerically are skipped; at least
    one must succeed. Ties keep the earliest trial, so the result is
    deterministic given the generator.
    """
    X = check_matrix(X, "X")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    alphas = [float(rng.random()) for _ in range(trials)]
    records: List[AlphaTrial] = []
    for a in alphas:
        est = clone(estimator)
        est.set_params(alpha=a)
        try:
            est.fit(X)
        except (NumericalError, NotPositiveDefiniteError) as exc:
            print(f"alpha={a:.6g} failed: {exc}", file=sys.stderr)
            continue
        final = est.history_.final
        records.append(AlphaTrial(a, final.objective, final.nl21))
    if not records:
        raise NumericalError("every search trial failed")
    best = min(records, key=lambda t: t.nl21)
    return AlphaSearchResult(best_alpha=best.alpha, trials=records)
