"""Seeded uniform samplers for columns, entry masks, and train/test splits.

Every sampler draws from a single fixed RNG family (PCG64) so benchmark
tables can be reproduced bit-for-bit from a root seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ObservationSet
from .errors import DomainError

RNG_ALGORITHM = "pcg64"

__all__ = ["Rng", "ColumnSelection", "sample_columns", "sample_mask", "split_train_test"]


@dataclass(frozen=True)
class Rng:
    """Immutable handle on a seeded random stream.

    ``child(*key)`` derives an independent stream for a sub-purpose (one per
    trial, one per sampler) without sharing state, so samples never depend on
    call order.
    """

    seed: int
    key: tuple[int, ...] = ()
    algorithm: str = RNG_ALGORITHM

    def __post_init__(self):
        if self.algorithm != RNG_ALGORITHM:
            raise DomainError(f"unsupported rng algorithm {self.algorithm!r}")

    def child(self, *key: int) -> "Rng":
        return Rng(self.seed, self.key + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True, eq=False)
class ColumnSelection:
    """Sorted unique column indices with the ratio and seed that produced them."""

    indices: np.ndarray
    alpha: float
    seed: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return int(self.indices.size)


def _count(fraction: float, total: int) -> int:
    # round-half-to-even, floored at 1
    return max(1, round(fraction * total))


def sample_columns(n2: int, alpha: float, rng: Rng) -> ColumnSelection:
    """Uniformly sample max(1, round(alpha * n2)) distinct columns of [0, n2)."""
    if n2 < 1:
        raise DomainError(f"n2 must be >= 1, got {n2}")
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    d = _count(alpha, n2)
    picked = rng.generator().permutation(n2)[:d]
    return ColumnSelection(np.sort(picked), float(alpha), rng.seed)


def sample_mask(n1: int, n2: int, rho: float, rng: Rng) -> ObservationSet:
    """Uniformly sample round(rho * n1 * n2) distinct cells of an n1 x n2 grid."""
    if n1 < 1 or n2 < 1:
        raise DomainError(f"matrix dimensions must be positive, got {n1}x{n2}")
    if not 0.0 < rho <= 1.0:
        raise DomainError(f"rho must lie in (0, 1], got {rho}")
    if rho * n1 * n2 < 1.0:
        raise DomainError(f"rho={rho} selects no cells from a {n1}x{n2} grid")
    count = round(rho * n1 * n2)
    flat = rng.generator().permutation(n1 * n2)[:count]
    rows, cols = np.divmod(flat, n2)
    return ObservationSet((n1, n2), rows, cols)


def split_train_test(
    omega: ObservationSet, train_fraction: float, rng: Rng
) -> tuple[ObservationSet, ObservationSet]:
    """Random disjoint split of omega with |train| = round(fraction * |omega|)."""
    if len(omega) < 2:
        raise DomainError("need at least two observations to split")
    if not 0.0 < train_fraction < 1.0:
        raise DomainError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = round(train_fraction * len(omega))
    perm = rng.generator().permutation(len(omega))
    train_idx, test_idx = perm[:n_train], perm[n_train:]
    train = ObservationSet(omega.shape, omega.rows[train_idx], omega.cols[train_idx])
    test = ObservationSet(omega.shape, omega.rows[test_idx], omega.cols[test_idx])
    return train, test
