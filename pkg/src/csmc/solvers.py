"""Low-rank completion solvers.

``pgd_complete`` minimizes the soft-thresholded objective

    0.5 * ||P(X) - P(M)||_F^2 + lam * ||X||_*

by proximal gradient descent (iterated singular value thresholding), where P
zeroes everything off the observed set. ``nn_complete`` drives lam -> 0 over a
geometric continuation schedule with warm starts, approximating the
equality-constrained nuclear-norm minimum. ``mf_als_complete`` is the
rank-constrained alternating least squares baseline.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import svds

from .core import MaskedMatrix, _shrink_svd
from .errors import DivergenceError, DomainError
from .sampling import Rng

__all__ = [
    "ContinuationConfig",
    "SolverConfig",
    "ConvergenceTrace",
    "CompletionResult",
    "pgd_complete",
    "nn_complete",
    "mf_als_complete",
]

# iterate-change threshold treated as "at a fixed point"
FIXED_POINT_TOL = 1e-10

INFEASIBLE_FLAG = "infeasible-tolerance"


@dataclass(frozen=True)
class ContinuationConfig:
    """Geometric lam schedule used by nn_complete: lam_{i+1} = lam_i / eta
    until the observed-entry residual drops below tol_feas or lam falls
    under lam_min (defaults to lam_min_ratio * lam_0)."""

    eta: float = 2.0
    lam_min: float | None = None
    lam_min_ratio: float = 1e-8
    tol_feas: float = 1e-6

    def __post_init__(self):
        if self.eta <= 1.0:
            raise DomainError(f"continuation factor eta must exceed 1, got {self.eta}")
        if self.tol_feas <= 0 or self.lam_min_ratio <= 0:
            raise DomainError("continuation tolerances must be positive")
        if self.lam_min is not None and self.lam_min <= 0:
            raise DomainError("lam_min must be positive")


@dataclass(frozen=True)
class SolverConfig:
    """Shared solver knobs.

    lam=None lets pgd_complete scale the regularizer off the data
    (0.01 * ||P(M)||_2). step is the gradient step; the projection gradient
    is 1-Lipschitz, so step <= 1 keeps the objective monotone.
    """

    lam: float | None = None
    step: float = 1.0
    max_iters: int = 500
    tol_rel: float = 1e-7
    continuation: ContinuationConfig = field(default_factory=ContinuationConfig)
    seed: int = 0
    record_every: int = 1
    threads: int = 1

    def __post_init__(self):
        if self.lam is not None and self.lam < 0:
            raise DomainError(f"lam must be non-negative, got {self.lam}")
        if not 0.0 < self.step <= 1.0:
            raise DomainError(f"step must lie in (0, 1], got {self.step}")
        if self.max_iters < 1:
            raise DomainError("max_iters must be positive")
        if self.tol_rel <= 0:
            raise DomainError("tol_rel must be positive")
        if self.record_every < 1 or self.threads < 1:
            raise DomainError("record_every and threads must be >= 1")


@dataclass
class ConvergenceTrace:
    """Per-iteration record: objective, observed-entry residual, retained
    rank, cumulative wall-clock, and the active regularizer value."""

    iterations: list[int] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    rank: list[int] = field(default_factory=list)
    elapsed_s: list[float] = field(default_factory=list)
    lam: list[float] = field(default_factory=list)
    record_every: int = 1
    threads: int = 1

    def append(self, iteration, objective, residual, rank, elapsed_s, lam):
        self.iterations.append(int(iteration))
        self.objective.append(float(objective))
        self.residual.append(float(residual))
        self.rank.append(int(rank))
        self.elapsed_s.append(float(elapsed_s))
        self.lam.append(float(lam))

    def __len__(self) -> int:
        return len(self.iterations)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "objective": self.objective,
            "residual": self.residual,
            "rank": self.rank,
            "elapsed_s": self.elapsed_s,
            "lam": self.lam,
            "record_every": self.record_every,
            "threads": self.threads,
        }


@dataclass
class CompletionResult:
    """Recovered matrix plus convergence trace and per-stage timings."""

    matrix: np.ndarray
    trace: ConvergenceTrace
    elapsed: dict[str, float]
    solver: str
    flags: tuple[str, ...] = ()

    @property
    def feasible(self) -> bool:
        return INFEASIBLE_FLAG not in self.flags

    def to_dict(self, include_matrix: bool = False) -> dict:
        out = {
            "solver": self.solver,
            "shape": list(self.matrix.shape),
            "elapsed": dict(self.elapsed),
            "flags": list(self.flags),
            "trace": self.trace.to_dict(),
        }
        if include_matrix:
            out["matrix"] = self.matrix.tolist()
        return out


def _objective(resid: np.ndarray, lam: float, nuclear: float) -> float:
    return 0.5 * float(resid @ resid) + lam * nuclear


# below this dimension a full LAPACK SVD beats iterative solvers outright
_TRUNCATED_MIN_DIM = 80


def _shrink_svd_auto(
    y: np.ndarray, tau: float, k_hint: int
) -> tuple[np.ndarray, np.ndarray]:
    """Soft-threshold the spectrum of y, computing only the leading part of
    the SVD when the retained rank is expected to be small.

    Grows k until the smallest computed singular value falls under tau, so
    the result matches the full-SVD path to solver accuracy (~1e-13).
    """
    min_dim = min(y.shape)
    if tau <= 0.0 or min_dim <= _TRUNCATED_MIN_DIM:
        return _shrink_svd(y, tau)
    k = min(max(k_hint + 4, 10), min_dim - 1)
    while True:
        if k > min_dim // 3:
            return _shrink_svd(y, tau)
        try:
            u, s, vt = svds(y, k=k, solver="propack", random_state=0)
        except Exception:
            return _shrink_svd(y, tau)
        order = np.argsort(s)[::-1]
        s = s[order]
        if s[-1] <= tau:
            u, vt = u[:, order], vt[order]
            shrunk = s[s > tau] - tau
            r = shrunk.size
            if r == 0:
                return np.zeros_like(y), shrunk
            return (u[:, :r] * shrunk) @ vt[:r], shrunk
        k = min(2 * k, min_dim - 1)


def _pgd_loop(
    x: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    vals: np.ndarray,
    obs_norm: float,
    lam: float,
    cfg: SolverConfig,
    trace: ConvergenceTrace,
    t_start: float,
    it_offset: int = 0,
    rank_hint: int = 0,
) -> tuple[np.ndarray, float, int, int]:
    """SVT iterations at fixed lam from iterate x, run to stationarity.

    Returns (x, residual, iterations done, retained rank).
    """
    t = cfg.step
    tau = t * lam
    f_prev = None
    feas = np.inf
    done = 0
    rank = rank_hint
    for it in range(cfg.max_iters):
        y = x.copy()
        y[rows, cols] += t * (vals - y[rows, cols])
        x_new, sigma = _shrink_svd_auto(y, tau, rank)
        rank = sigma.size
        resid = x_new[rows, cols] - vals
        f = _objective(resid, lam, float(sigma.sum()))
        if not np.isfinite(f):
            raise DivergenceError("solver iterate became non-finite", it_offset + it)
        feas = float(np.linalg.norm(resid) / obs_norm)
        if (it_offset + it) % cfg.record_every == 0:
            trace.append(
                it_offset + it, f, feas, rank, time.perf_counter() - t_start, lam
            )
        step_norm = float(np.linalg.norm(x_new - x))
        x = x_new
        done = it + 1
        if f_prev is not None and abs(f_prev - f) <= cfg.tol_rel * max(abs(f_prev), 1e-30):
            break
        if step_norm <= FIXED_POINT_TOL * max(1.0, float(np.linalg.norm(x))):
            break
        f_prev = f
    return x, feas, done, rank


def _prepare(obs: MaskedMatrix):
    rows, cols = obs.mask.rows, obs.mask.cols
    vals = obs.observed()
    obs_norm = float(np.linalg.norm(vals))
    return rows, cols, vals, obs_norm


def _spectral_scale(obs: MaskedMatrix) -> float:
    # ||P(M)||_2; obs.values is already the projected matrix
    return float(np.linalg.norm(obs.values, 2))


def pgd_complete(
    obs: MaskedMatrix, cfg: SolverConfig | None = None, x0: np.ndarray | None = None
) -> CompletionResult:
    """Proximal gradient descent on the lam-regularized completion objective.

    Starts from zeros (or ``x0`` for warm starts) and iterates
    X <- svt(X + step * P(M - X), step * lam) until the relative objective
    change falls below tol_rel, the iterate stops moving, or max_iters.
    """
    cfg = cfg or SolverConfig()
    rows, cols, vals, obs_norm = _prepare(obs)
    lam = cfg.lam if cfg.lam is not None else 0.01 * _spectral_scale(obs)
    x = np.zeros(obs.shape) if x0 is None else np.array(x0, dtype=np.float64)
    if x.shape != obs.shape:
        raise DomainError(f"warm start shape {x.shape} != data shape {obs.shape}")
    trace = ConvergenceTrace(record_every=cfg.record_every, threads=cfg.threads)
    t0 = time.perf_counter()
    x, _, _, _ = _pgd_loop(x, rows, cols, vals, obs_norm, lam, cfg, trace, t0)
    return CompletionResult(
        matrix=x,
        trace=trace,
        elapsed={"solve": time.perf_counter() - t0},
        solver="pgd",
    )


def nn_complete(obs: MaskedMatrix, cfg: SolverConfig | None = None) -> CompletionResult:
    """Nuclear-norm completion via lam-continuation.

    Solves the regularized problem over lam_0 = ||P(M)||_2, lam_0/eta,
    lam_0/eta^2, ... with warm starts until the observed entries are
    reproduced to tol_feas. If the schedule bottoms out at lam_min first,
    the result is returned flagged ``infeasible-tolerance``.
    """
    cfg = cfg or SolverConfig()
    cont = cfg.continuation
    rows, cols, vals, obs_norm = _prepare(obs)
    trace = ConvergenceTrace(record_every=cfg.record_every, threads=cfg.threads)
    t0 = time.perf_counter()
    lam0 = _spectral_scale(obs)
    if lam0 == 0.0:
        # all observed entries are zero; the zero matrix is the exact optimum
        trace.append(0, 0.0, 0.0, 0, time.perf_counter() - t0, 0.0)
        return CompletionResult(
            matrix=np.zeros(obs.shape),
            trace=trace,
            elapsed={"solve": time.perf_counter() - t0},
            solver="nn",
        )
    lam_min = cont.lam_min if cont.lam_min is not None else cont.lam_min_ratio * lam0
    x = np.zeros(obs.shape)
    lam = lam0
    it_offset = 0
    rank_hint = 0
    while True:
        x, feas, done, rank_hint = _pgd_loop(
            x, rows, cols, vals, obs_norm, lam, cfg, trace, t0,
            it_offset=it_offset, rank_hint=rank_hint,
        )
        it_offset += done
        if feas < cont.tol_feas:
            flags: tuple[str, ...] = ()
            break
        if lam / cont.eta < lam_min:
            flags = (INFEASIBLE_FLAG,)
            break
        lam /= cont.eta
    return CompletionResult(
        matrix=x,
        trace=trace,
        elapsed={"solve": time.perf_counter() - t0},
        solver="nn",
        flags=flags,
    )


def mf_als_complete(
    obs: MaskedMatrix, k: int, reg: float = 0.1, cfg: SolverConfig | None = None
) -> CompletionResult:
    """Rank-k factorization baseline, alternating ridge least squares.

    Minimizes 0.5 ||P(M) - P(L R^T)||_F^2 + 0.5 reg (||L||_F^2 + ||R||_F^2);
    each half-sweep solves its subproblem exactly, so the regularized
    objective is non-increasing per half-step. The trace records one entry
    per half-sweep.
    """
    cfg = cfg or SolverConfig()
    n1, n2 = obs.shape
    if k < 1 or k > min(n1, n2):
        raise DomainError(f"factor rank must lie in [1, {min(n1, n2)}], got {k}")
    if reg < 0:
        raise DomainError(f"reg must be non-negative, got {reg}")
    rows, cols, vals, obs_norm = _prepare(obs)
    order_r = np.argsort(rows, kind="stable")
    order_c = np.argsort(cols, kind="stable")
    row_start = np.searchsorted(rows[order_r], np.arange(n1 + 1))
    col_start = np.searchsorted(cols[order_c], np.arange(n2 + 1))
    by_row = [(cols[order_r][a:b], vals[order_r][a:b]) for a, b in zip(row_start, row_start[1:])]
    by_col = [(rows[order_c][a:b], vals[order_c][a:b]) for a, b in zip(col_start, col_start[1:])]

    gen = Rng(cfg.seed).generator()
    scale = 1.0 / np.sqrt(k)
    left = gen.standard_normal((n1, k)) * scale
    right = gen.standard_normal((n2, k)) * scale

    def half_sweep(target, source, index):
        eye = reg * np.eye(k)
        for i, (idx, b) in enumerate(index):
            if idx.size == 0:
                target[i] = 0.0
                continue
            a = source[idx]
            gram = a.T @ a + eye
            rhs = a.T @ b
            try:
                target[i] = np.linalg.solve(gram, rhs)
            except np.linalg.LinAlgError:
                target[i], *_ = np.linalg.lstsq(a, b, rcond=None)

    def objective() -> tuple[float, float]:
        pred = np.einsum("ij,ij->i", left[rows], right[cols])
        resid = pred - vals
        f = 0.5 * float(resid @ resid)
        f += 0.5 * reg * (float(np.sum(left * left)) + float(np.sum(right * right)))
        return f, float(np.linalg.norm(resid) / obs_norm)

    trace = ConvergenceTrace(record_every=cfg.record_every, threads=cfg.threads)
    t0 = time.perf_counter()
    f_prev = None
    half = 0
    for _ in range(cfg.max_iters):
        for target, source, index in ((left, right, by_row), (right, left, by_col)):
            half_sweep(target, source, index)
            f, feas = objective()
            if not np.isfinite(f):
                raise DivergenceError("factorization iterate became non-finite", half)
            if half % cfg.record_every == 0:
                trace.append(half, f, feas, k, time.perf_counter() - t0, reg)
            half += 1
        if f_prev is not None and abs(f_prev - f) <= cfg.tol_rel * max(abs(f_prev), 1e-30):
            break
        f_prev = f
    return CompletionResult(
        matrix=left @ right.T,
        trace=trace,
        elapsed={"solve": time.perf_counter() - t0},
        solver="mf",
    )
