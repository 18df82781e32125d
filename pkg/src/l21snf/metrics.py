"""Normalized reconstruction losses and per-iteration loss bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Optional

import numpy as np

from .linalg import frobenius_norm, l21_norm

__all__ = ["LossRecord", "LossHistory", "nfl", "nl21"]


@dataclass
class LossRecord:
    """One iteration's loss sample.

    ``objective`` is the solver's own objective (robust objective for the
    L21 solver, squared Frobenius error for the SNF baseline) and ``None``
    for PCA, which has no iterative objective.
    """

    iteration: int
    objective: Optional[float]
    nfl: float
    nl21: float


@dataclass
class LossHistory:
    """Ordered loss records, one per iteration starting at iteration 0."""

    records: List[LossRecord] = field(default_factory=list)

    def append(self, record: LossRecord) -> None:
        if self.records:
            last = self.records[-1].iteration
            if record.iteration <= last:
                raise ValueError(
                    f"iterations must increase: got {record.iteration} after {last}"
                )
        elif record.iteration != 0:
            raise ValueError("history must start at iteration 0")
        if record.nfl < 0 or record.nl21 < 0:
            raise ValueError("nfl and nl21 must be nonnegative")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[LossRecord]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def final(self) -> LossRecord:
        if not self.records:
            raise ValueError("history is empty")
        return self.records[-1]


def _check_pair(X, Xhat):
    X = np.asarray(X, dtype=np.float64)
    Xhat = np.asarray(Xhat, dtype=np.float64)
    if X.shape != Xhat.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Xhat.shape}")
    return X, Xhat


def nfl(X, Xhat):
    """Normalized Frobenius loss: ``||X - Xhat||_F / ||X||_F``."""
    X, Xhat = _check_pair(X, Xhat)
    denom = frobenius_norm(X)
    if denom == 0.0:
        raise ValueError("nfl is undefined for a zero matrix X")
    return frobenius_norm(X - Xhat) / denom


def nl21(X, Xhat):
    """Normalized L2,1 loss: ``||X - Xhat||_{2,1} / ||X||_{2,1}``."""
    X, Xhat = _check_pair(X, Xhat)
    denom = l21_norm(X)
    if denom == 0.0:
        raise ValueError("nl21 is undefined for a zero matrix X")
    return l21_norm(X - Xhat) / denom
