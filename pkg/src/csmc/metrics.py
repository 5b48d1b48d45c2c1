"""Evaluation metrics and per-trial record handling for the benchmark suites."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .core import as_matrix
from .errors import DomainError, ShapeError

__all__ = [
    "relative_error",
    "ecdf",
    "ecdf_points",
    "nmae",
    "hit_rate",
    "snr",
    "TrialRecord",
    "TRIAL_CSV_COLUMNS",
    "write_trials_csv",
]


def relative_error(m_hat, m) -> float:
    """Frobenius-norm relative error ||m - m_hat||_F / ||m||_F."""
    m_hat, m = as_matrix(m_hat, "m_hat"), as_matrix(m, "m")
    if m_hat.shape != m.shape:
        raise ShapeError(f"shape mismatch {m_hat.shape} vs {m.shape}")
    denom = np.linalg.norm(m)
    if denom == 0.0:
        raise DomainError("reference matrix is zero; relative error undefined")
    return float(np.linalg.norm(m - m_hat) / denom)


def ecdf(errors, a: float) -> float:
    """Fraction of recorded errors that are <= a."""
    errors = np.asarray(errors, dtype=np.float64).ravel()
    if errors.size == 0:
        raise DomainError("ecdf of an empty sample is undefined")
    return float(np.count_nonzero(errors <= a) / errors.size)


def ecdf_points(errors) -> list[tuple[float, float]]:
    """Step points (a, F(a)) of the empirical CDF, one per distinct error."""
    errors = np.asarray(errors, dtype=np.float64).ravel()
    if errors.size == 0:
        raise DomainError("ecdf of an empty sample is undefined")
    values, counts = np.unique(errors, return_counts=True)
    cum = np.cumsum(counts) / errors.size
    return [(float(a), float(f)) for a, f in zip(values, cum)]


def _as_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise DomainError("expected a non-empty list of (predicted, actual) pairs")
    return arr


def nmae(pairs, m_min: float, m_max: float) -> float:
    """Mean absolute error normalized by the rating-scale width."""
    arr = _as_pairs(pairs)
    if not m_max > m_min:
        raise DomainError(f"need m_max > m_min, got [{m_min}, {m_max}]")
    return float(np.mean(np.abs(arr[:, 0] - arr[:, 1])) / (m_max - m_min))


def hit_rate(pairs, m_min: float = -math.inf, m_max: float = math.inf) -> float:
    """Fraction of predictions whose clamped, half-up-rounded value equals the
    actual rating."""
    arr = _as_pairs(pairs)
    pred = np.clip(arr[:, 0], m_min, m_max)
    rounded = np.floor(pred + 0.5)
    return float(np.mean(rounded == arr[:, 1]))


def snr(m_hat, m) -> float:
    """Signal-to-noise ratio 20 log10(||m||_F / ||m_hat - m||_F) in decibels.

    Returns +inf when the reconstruction is exact.
    """
    m_hat, m = as_matrix(m_hat, "m_hat"), as_matrix(m, "m")
    if m_hat.shape != m.shape:
        raise ShapeError(f"shape mismatch {m_hat.shape} vs {m.shape}")
    noise = np.linalg.norm(m_hat - m)
    if noise == 0.0:
        return math.inf
    return float(20.0 * np.log10(np.linalg.norm(m) / noise))


TRIAL_CSV_COLUMNS = (
    "trial",
    "algorithm",
    "alpha",
    "rho",
    "rank",
    "epsilon",
    "elapsed_s",
    "nmae",
    "hr",
    "snr",
)


@dataclass
class TrialRecord:
    """One benchmark trial: identity, parameters, error, and runtime."""

    trial: int
    algorithm: str
    alpha: float | None
    rho: float | None
    rank: int | None
    epsilon: float
    elapsed_s: float
    extra: dict[str, float] = field(default_factory=dict)
    error: str | None = None

    def csv_row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        row = [
            fmt(self.trial),
            self.algorithm,
            fmt(self.alpha),
            fmt(self.rho),
            fmt(self.rank),
            fmt(self.epsilon),
            fmt(self.elapsed_s),
        ]
        for key in ("nmae", "hr", "snr"):
            row.append(fmt(self.extra.get(key)))
        return row

    def to_dict(self) -> dict:
        out = {
            "trial": self.trial,
            "algorithm": self.algorithm,
            "alpha": self.alpha,
            "rho": self.rho,
            "rank": self.rank,
            "epsilon": self.epsilon,
            "elapsed_s": self.elapsed_s,
            "extra": dict(self.extra),
        }
        if self.error is not None:
            out["error"] = self.error
        return out


def write_trials_csv(records, path) -> None:
    """Write trial records with the stable column order of TRIAL_CSV_COLUMNS."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIAL_CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.csv_row())
