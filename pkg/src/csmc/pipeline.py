"""Two-stage completion: sample and fill a column submatrix, then rebuild
every column by least squares against the completed columns.

Stage one restricts the observation set to a uniformly sampled column subset
and completes that n1 x d submatrix with a nuclear-norm solver. Stage two
solves, for every column j of the full matrix, the masked regression

    min_z ||C_hat[rows_j, :] z - m[rows_j, j]||_2

whose column-stacked solution Z minimizes 0.5 ||P(M) - P(C_hat Z)||_F^2, and
returns C_hat @ Z.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import MaskedMatrix, as_matrix, masked_least_squares
from .errors import DomainError, ShapeError
from .sampling import ColumnSelection, Rng, sample_columns
from .solvers import CompletionResult, SolverConfig, nn_complete, pgd_complete

__all__ = ["CsmcReport", "stage2_solve", "csmc_complete", "STAGE1_SOLVERS"]

STAGE1_SOLVERS = {"nn": nn_complete, "pgd": pgd_complete}


@dataclass
class CsmcReport:
    """Everything the two-stage run produced, including timings per stage."""

    selection: ColumnSelection
    stage1: CompletionResult
    z_hat: np.ndarray
    m_hat: np.ndarray
    unconstrained_columns: list[int]
    elapsed: dict[str, float]

    def to_dict(self, include_matrices: bool = False) -> dict:
        out = {
            "selection": {
                "indices": self.selection.indices.tolist(),
                "alpha": self.selection.alpha,
                "seed": self.selection.seed,
            },
            "stage1": self.stage1.to_dict(include_matrix=include_matrices),
            "shape": list(self.m_hat.shape),
            "unconstrained_columns": list(self.unconstrained_columns),
            "elapsed": dict(self.elapsed),
        }
        if include_matrices:
            out["z_hat"] = self.z_hat.tolist()
            out["m_hat"] = self.m_hat.tolist()
        return out


def _low_rank_split(c_hat: np.ndarray):
    """Exact factorization c_hat = Q @ W with Q orthonormal, if the numerical
    rank at machine precision is small enough to pay off.

    Stage-one outputs are singular-value-thresholded, hence exactly low rank,
    which makes the per-column pseudoinverse factor through Q: for columns
    observing at least k0 rows, pinv(Q[rows] @ W) = pinv(W) @ pinv(Q[rows]).
    """
    n1, d = c_hat.shape
    u, s, vt = np.linalg.svd(c_hat, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return None
    k0 = int(np.count_nonzero(s > np.finfo(np.float64).eps * max(n1, d) * s[0]))
    if k0 > min(n1, d) // 2:
        return None
    # W = diag(s_k) @ vt_k, full row rank, so pinv(W) = v_k / s_k
    return u[:, :k0], vt[:k0].T / s[:k0], k0


def stage2_solve(c_hat, obs: MaskedMatrix, threads: int = 1) -> np.ndarray:
    """Column-wise masked least squares of the observed data against c_hat.

    Returns the d x n2 coefficient matrix; columns with no observed entries
    get the zero vector. Columns sharing an observed-row pattern are solved
    in one batched call, and groups may be solved on a thread pool since the
    per-column problems are independent.
    """
    c_hat = as_matrix(c_hat, "c_hat")
    if c_hat.shape[0] != obs.shape[0]:
        raise ShapeError(
            f"c_hat has {c_hat.shape[0]} rows but observations have {obs.shape[0]}"
        )
    n2 = obs.shape[1]
    d = c_hat.shape[1]
    col_rows = obs.mask.rows_by_column()
    values = obs.values
    z = np.zeros((d, n2))
    split = _low_rank_split(c_hat)

    groups: dict[bytes, list[int]] = {}
    for j, rows in enumerate(col_rows):
        if rows.size == 0:
            continue
        groups.setdefault(rows.tobytes(), []).append(j)

    def solve(cols: list[int]) -> None:
        rows = col_rows[cols[0]]
        b = values[np.ix_(rows, cols)]
        if split is not None and rows.size >= split[2]:
            q, pinv_w, _ = split
            z[:, cols] = pinv_w @ masked_least_squares(q, rows, b)
        else:
            z[:, cols] = masked_least_squares(c_hat, rows, b)

    if threads > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(solve, groups.values()))
    else:
        for cols in groups.values():
            solve(cols)
    return z


def csmc_complete(
    obs: MaskedMatrix,
    alpha: float,
    stage1_solver: str = "nn",
    cfg: SolverConfig | None = None,
    rng: Rng | None = None,
) -> CsmcReport:
    """Run the full two-stage pipeline on a masked matrix.

    Samples round(alpha * n2) columns, completes the restricted submatrix
    with the chosen stage-one solver, then regresses the complete observation
    set (selected columns included) on the result. Columns without any
    observation are zero-filled and listed in the report.
    """
    if stage1_solver not in STAGE1_SOLVERS:
        raise DomainError(
            f"unknown stage-one solver {stage1_solver!r}; expected one of "
            f"{sorted(STAGE1_SOLVERS)}"
        )
    cfg = cfg or SolverConfig()
    rng = rng or Rng(cfg.seed)
    selection = sample_columns(obs.shape[1], alpha, rng)
    sub = obs.restrict_columns(selection.indices)

    t0 = time.perf_counter()
    stage1 = STAGE1_SOLVERS[stage1_solver](sub, cfg)
    t1 = time.perf_counter()
    z_hat = stage2_solve(stage1.matrix, obs, threads=cfg.threads)
    m_hat = stage1.matrix @ z_hat
    t2 = time.perf_counter()

    unconstrained = np.flatnonzero(obs.mask.column_counts() == 0)
    return CsmcReport(
        selection=selection,
        stage1=stage1,
        z_hat=z_hat,
        m_hat=m_hat,
        unconstrained_columns=[int(j) for j in unconstrained],
        elapsed={"stage1": t1 - t0, "stage2": t2 - t1},
    )
