"""Column-sampled two-stage low-rank matrix completion toolkit."""

from .core import (
    MaskedMatrix,
    ObservationSet,
    SvdFactors,
    masked_least_squares,
    project_observed,
    svt,
    thin_svd,
)
from .diagnostics import (
    RecoveryBounds,
    coherence,
    condition_number,
    recovery_bounds,
    subspace_coherence,
)
from .metrics import ecdf, hit_rate, nmae, relative_error, snr
from .pipeline import CsmcReport, csmc_complete, stage2_solve
from .sampling import ColumnSelection, Rng, sample_columns, sample_mask, split_train_test
from .solvers import (
    CompletionResult,
    ContinuationConfig,
    ConvergenceTrace,
    SolverConfig,
    mf_als_complete,
    nn_complete,
    pgd_complete,
)

__version__ = "0.1.0"

__all__ = [
    "MaskedMatrix",
    "ObservationSet",
    "SvdFactors",
    "project_observed",
    "svt",
    "masked_least_squares",
    "thin_svd",
    "Rng",
    "ColumnSelection",
    "sample_columns",
    "sample_mask",
    "split_train_test",
    "SolverConfig",
    "ContinuationConfig",
    "ConvergenceTrace",
    "CompletionResult",
    "pgd_complete",
    "nn_complete",
    "mf_als_complete",
    "CsmcReport",
    "stage2_solve",
    "csmc_complete",
    "coherence",
    "subspace_coherence",
    "condition_number",
    "RecoveryBounds",
    "recovery_bounds",
    "relative_error",
    "ecdf",
    "nmae",
    "hit_rate",
    "snr",
]
