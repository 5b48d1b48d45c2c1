"""Coherence, conditioning, and sample-complexity calculators.

These quantify when uniform column sampling plus a per-column least-squares
reconstruction recovers a low-rank matrix exactly, and with what probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .core import as_matrix, _check_finite
from .errors import DomainError

__all__ = [
    "subspace_coherence",
    "coherence",
    "condition_number",
    "RecoveryBounds",
    "recovery_bounds",
]

DEFAULT_RANK_TOL = 1e-10


def subspace_coherence(basis) -> float:
    """Coherence of the span of a column-orthonormal basis (n x k).

    Defined as (n / k) * max_i ||P e_i||^2 where P projects onto the span;
    equals (n / k) times the largest squared row norm of the basis. Always
    in [1, n/k]: 1 for maximally spread subspaces, n/k for axis-aligned ones.
    """
    b = as_matrix(basis, "basis")
    n, k = b.shape
    if k < 1 or k > n:
        raise DomainError(f"basis must be n x k with 1 <= k <= n, got {b.shape}")
    gram = b.T @ b
    if not np.allclose(gram, np.eye(k), atol=1e-8):
        raise DomainError("basis columns are not orthonormal (tolerance 1e-8)")
    row_norms = np.einsum("ij,ij->i", b, b)
    return float(n / k * row_norms.max())


def _truncated_svd(x, rank_tol: float):
    x = _check_finite(as_matrix(x))
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise DomainError("zero matrix has no singular subspace")
    r = int(np.count_nonzero(s > rank_tol * s[0]))
    return u, s, vt, r


def coherence(x, rank_tol: float = DEFAULT_RANK_TOL) -> tuple[float, int]:
    """Matrix coherence mu0 = max of the left/right singular-subspace
    coherences at the numerical rank; returns (mu0, rank)."""
    u, _, vt, r = _truncated_svd(x, rank_tol)
    mu_u = subspace_coherence(u[:, :r])
    mu_v = subspace_coherence(vt[:r].T)
    return max(mu_u, mu_v), r


def condition_number(x, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """sigma_1 / sigma_r at the numerical rank r."""
    _, s, _, r = _truncated_svd(x, rank_tol)
    return float(s[0] / s[r - 1])


@dataclass(frozen=True)
class RecoveryBounds:
    """Sample-size requirements for exact two-stage recovery.

    d_min: columns to sample so the selection captures the column space;
    omega_min: observed entries needed for the stage-two regression to have
    a unique exact solution; both hold jointly with probability at least
    ``success_prob``. thm1_d_min / coherence_inflation bound, a priori, how
    many columns keep the sampled submatrix itself incoherent and by how
    much its coherence can exceed the full matrix's.
    """

    d_min: int
    omega_min: int
    success_prob: float
    thm1_d_min: int
    coherence_inflation: float

    def to_dict(self) -> dict:
        return asdict(self)


def recovery_bounds(
    n1: int,
    n2: int,
    r: int,
    r_tilde: int,
    mu0_m: float,
    mu0_c: float,
    kappa: float,
    gamma: float,
) -> RecoveryBounds:
    """Evaluate the recovery sample-size bounds for the given problem shape.

    mu0_m / mu0_c are the coherences of the full matrix and of the sampled
    column submatrix; r_tilde (<= r) is the submatrix rank; gamma > 0 sets
    the failure probability 3 * exp(-gamma).
    """
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    for name, val in (("n1", n1), ("n2", n2), ("r", r), ("r_tilde", r_tilde)):
        if val < 1:
            raise DomainError(f"{name} must be a positive integer, got {val}")
    if r_tilde > r:
        raise DomainError(f"r_tilde={r_tilde} exceeds r={r}")
    if mu0_m < 1 or mu0_c < 1 or kappa < 1:
        raise DomainError("coherences and condition number are >= 1 by definition")
    d_min = math.ceil(7.0 * mu0_m * r * (gamma + math.log(r)))
    omega_min = math.ceil(r_tilde * n2 * mu0_c * (gamma + math.log(n2 * r_tilde / 2.0)))
    # -expm1(ln 3 - gamma) = 1 - 3 exp(-gamma), exact at the gamma = ln 3 boundary
    return RecoveryBounds(
        d_min=max(1, d_min),
        omega_min=max(1, omega_min),
        success_prob=-math.expm1(math.log(3.0) - gamma),
        thm1_d_min=max(1, math.ceil(1.06 * mu0_m * r * math.log(r * n2))),
        coherence_inflation=100.0 * kappa**2 * mu0_m,
    )
