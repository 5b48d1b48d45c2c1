"""Matrix containers, the observation-sampling operator, and shared primitives.

Matrices are plain float64 ``numpy`` arrays; missing entries are tracked by an
explicit :class:`ObservationSet` rather than sentinel values, so 0 stays a
legal observed value everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError, UnconstrainedColumnError

__all__ = [
    "ObservationSet",
    "MaskedMatrix",
    "SvdFactors",
    "as_matrix",
    "thin_svd",
    "project_observed",
    "svt",
    "masked_least_squares",
]


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array without requiring finiteness."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={a.ndim}")
    return a


def _check_finite(x: np.ndarray, name: str = "matrix") -> np.ndarray:
    if not np.isfinite(x).all():
        raise DomainError(f"{name} contains non-finite entries")
    return x


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Set of observed (row, col) indices of an n1 x n2 matrix.

    Pairs are stored 0-based, deduplicated, and kept in lexicographic
    (row, col) order so every consumer iterates deterministically.
    """

    shape: tuple[int, int]
    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self):
        n1, n2 = self.shape
        if n1 < 1 or n2 < 1:
            raise ShapeError(f"invalid matrix shape {self.shape}")
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            raise ShapeError("rows and cols must have equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= n1:
                raise ShapeError(f"row index out of range for shape {self.shape}")
            if cols.min() < 0 or cols.max() >= n2:
                raise ShapeError(f"col index out of range for shape {self.shape}")
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        if rows.size > 1:
            same = (np.diff(rows) == 0) & (np.diff(cols) == 0)
            if same.any():
                k = int(np.flatnonzero(same)[0])
                raise DomainError(f"duplicate observation ({rows[k]}, {cols[k]})")
        rows.flags.writeable = False
        cols.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "shape", (int(n1), int(n2)))

    @classmethod
    def from_pairs(cls, shape: tuple[int, int], pairs) -> "ObservationSet":
        pairs = list(pairs)
        if pairs:
            rows, cols = zip(*pairs)
        else:
            rows, cols = (), ()
        return cls(shape, np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))

    @classmethod
    def full(cls, shape: tuple[int, int]) -> "ObservationSet":
        n1, n2 = shape
        rows, cols = np.divmod(np.arange(n1 * n2, dtype=np.int64), n2)
        return cls(shape, rows, cols)

    def __len__(self) -> int:
        return int(self.rows.size)

    def __iter__(self):
        return zip(self.rows.tolist(), self.cols.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ObservationSet):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
        )

    @property
    def density(self) -> float:
        return len(self) / (self.shape[0] * self.shape[1])

    def to_bool_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.rows, self.cols] = True
        return mask

    def column_counts(self) -> np.ndarray:
        return np.bincount(self.cols, minlength=self.shape[1])

    def rows_by_column(self) -> list[np.ndarray]:
        """Observed row indices of each column (compressed per-column view)."""
        order = np.argsort(self.cols, kind="stable")
        rows, cols = self.rows[order], self.cols[order]
        starts = np.searchsorted(cols, np.arange(self.shape[1] + 1))
        return [rows[starts[j] : starts[j + 1]] for j in range(self.shape[1])]

    def restrict_columns(self, indices: np.ndarray) -> "ObservationSet":
        """Keep pairs whose column is in ``indices``; columns are renumbered
        to the position of their index in the (sorted) selection."""
        indices = np.asarray(indices, dtype=np.int64)
        pos = np.searchsorted(indices, self.cols)
        pos_clipped = np.minimum(pos, indices.size - 1)
        keep = indices[pos_clipped] == self.cols
        return ObservationSet(
            (self.shape[0], int(indices.size)), self.rows[keep], pos_clipped[keep]
        )


@dataclass(frozen=True, eq=False)
class MaskedMatrix:
    """Dense value store plus the observation set; the universal solver input.

    Values off the mask are canonicalized to 0 at construction so no consumer
    can accidentally depend on them.
    """

    values: np.ndarray
    mask: ObservationSet

    def __post_init__(self):
        values = as_matrix(self.values, "values")
        if values.shape != self.mask.shape:
            raise ShapeError(
                f"values shape {values.shape} != mask shape {self.mask.shape}"
            )
        if len(self.mask) == 0:
            raise DomainError("MaskedMatrix requires at least one observation")
        _check_finite(values[self.mask.rows, self.mask.cols], "observed values")
        values = project_observed(values, self.mask)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_dense(cls, dense, mask: ObservationSet) -> "MaskedMatrix":
        return cls(as_matrix(dense), mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def density(self) -> float:
        return self.mask.density

    def observed(self) -> np.ndarray:
        """Observed values in the mask's lexicographic order."""
        return self.values[self.mask.rows, self.mask.cols]

    def restrict_columns(self, indices: np.ndarray) -> "MaskedMatrix":
        indices = np.asarray(indices, dtype=np.int64)
        sub_mask = self.mask.restrict_columns(indices)
        if len(sub_mask) == 0:
            raise DomainError("no observations in selected columns")
        return MaskedMatrix(self.values[:, indices], sub_mask)


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Thin SVD factors U (n1 x k), sigma (k, non-increasing), V (n2 x k)."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def k(self) -> int:
        return int(self.sigma.size)

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def thin_svd(x) -> SvdFactors:
    x = _check_finite(as_matrix(x))
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    return SvdFactors(u, s, vt.T)


def project_observed(x, omega: ObservationSet) -> np.ndarray:
    """Keep entries of ``x`` on ``omega``, zero everywhere else."""
    x = as_matrix(x)
    if x.shape != omega.shape:
        raise ShapeError(f"matrix shape {x.shape} != mask shape {omega.shape}")
    out = np.zeros_like(x)
    out[omega.rows, omega.cols] = x[omega.rows, omega.cols]
    return out


def _shrink_svd(x: np.ndarray, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Soft-threshold the spectrum of ``x``; returns (matrix, shrunk sigma)."""
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    shrunk = s[s > tau] - tau
    k = shrunk.size
    if k == 0:
        return np.zeros_like(x), shrunk
    return (u[:, :k] * shrunk) @ vt[:k], shrunk


def svt(x, tau: float) -> np.ndarray:
    """Singular value thresholding: the proximal operator of the nuclear norm.

    Returns ``U diag(max(sigma - tau, 0)) V^T`` for the thin SVD of ``x``.
    """
    if tau < 0:
        raise DomainError(f"threshold must be non-negative, got {tau}")
    x = _check_finite(as_matrix(x))
    return _shrink_svd(x, float(tau))[0]


def masked_least_squares(a, rows, b) -> np.ndarray:
    """Minimum-norm z minimizing ||a[rows, :] @ z - b||_2.

    Solved through the truncated pseudoinverse: singular values below
    rcond * sigma_1 with rcond = eps * max(len(rows), a.shape[1]) are
    treated as zero. ``b`` may be a vector or a (len(rows), m) matrix of
    stacked right-hand sides sharing the same rows.
    """
    a = as_matrix(a, "design")
    rows = np.asarray(rows, dtype=np.int64).ravel()
    if rows.size == 0:
        raise UnconstrainedColumnError("no observed rows for this column")
    if rows.min() < 0 or rows.max() >= a.shape[0]:
        raise ShapeError("row index out of range for design matrix")
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != rows.size:
        raise ShapeError(f"got {rows.size} rows but {b.shape[0]} values")
    rcond = np.finfo(np.float64).eps * max(rows.size, a.shape[1])
    z, *_ = np.linalg.lstsq(a[rows], b, rcond=rcond)
    return z
