"""Benchmark suites: seeded trial loops, aggregation, and report emission.

A suite expands its algorithm/parameter grids into trials, derives each
trial's seed as root seed + trial index, and records one TrialRecord per run.
Reruns with the same config reproduce every non-timing byte of the outputs.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace, asdict
from pathlib import Path

import numpy as np

from . import io as matrix_io
from .core import MaskedMatrix
from .datasets import SyntheticSpec, gen_synthetic, load_image_gray, load_movielens
from .diagnostics import coherence, condition_number, recovery_bounds
from .errors import CsmcError, DataError, DomainError
from .metrics import (
    TrialRecord,
    ecdf_points,
    hit_rate,
    nmae,
    relative_error,
    snr,
    write_trials_csv,
)
from .pipeline import csmc_complete
from .sampling import Rng, sample_mask, split_train_test
from .solvers import ContinuationConfig, SolverConfig, mf_als_complete, nn_complete, pgd_complete

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "run_suite",
    "emit_plots_data",
    "run_complete",
    "run_diagnose",
]

SUITES = ("synth", "movielens", "inpaint")

# per-trial child streams of the trial seed
_STREAM_MASK = 1
_STREAM_SPLIT = 2
_STREAM_COLUMNS = 3


@dataclass(frozen=True)
class AlgorithmSpec:
    kind: str  # nn | pgd | mf | csnn | cspgd
    alpha: float | None = None

    @property
    def label(self) -> str:
        if self.alpha is None:
            return self.kind.upper()
        return f"{self.kind.upper()}-{self.alpha:g}"


def _parse_algorithms(tokens, alphas) -> list[AlgorithmSpec]:
    specs: list[AlgorithmSpec] = []
    for token in tokens:
        token = token.strip().lower()
        alpha = None
        if "-" in token:
            token, _, suffix = token.partition("-")
            try:
                alpha = float(suffix)
            except ValueError:
                raise DomainError(f"bad algorithm token {token}-{suffix}") from None
        if token not in ("nn", "pgd", "mf", "csnn", "cspgd"):
            raise DomainError(f"unknown algorithm {token!r}")
        if token in ("csnn", "cspgd"):
            grid = [alpha] if alpha is not None else list(alphas)
            if not grid:
                raise DomainError(f"algorithm {token!r} needs an alpha grid")
            for a in grid:
                if not 0.0 < a <= 1.0:
                    raise DomainError(f"alpha must lie in (0, 1], got {a}")
                specs.append(AlgorithmSpec(token, float(a)))
        else:
            if alpha is not None:
                raise DomainError(f"algorithm {token!r} takes no alpha suffix")
            specs.append(AlgorithmSpec(token))
    return specs


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a benchmark run; serializes to/from JSON."""

    suite: str = "synth"
    algorithms: tuple[str, ...] = ("nn",)
    alphas: tuple[float, ...] = ()
    rhos: tuple[float, ...] = (0.5,)
    ranks: tuple[int, ...] = (5,)
    n_trials: int = 20
    seed: int = 0
    out_dir: str = "results"
    n1: int = 300
    n2: int = 1000
    noise_density: float = 0.3
    noise_scale: float = 1.0
    data_path: str | None = None
    train_fraction: float = 0.8
    scale: tuple[float, float] = (0.5, 5.0)
    mf_rank: int | None = None
    mf_reg: float = 0.1
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.suite not in SUITES:
            raise DomainError(f"unknown suite {self.suite!r}; expected one of {SUITES}")
        if self.n_trials < 1:
            raise DomainError("n_trials must be >= 1")
        if not self.algorithms or not self.rhos or not self.ranks:
            raise DomainError("algorithm, rho, and rank grids must be non-empty")

    def specs(self) -> list[AlgorithmSpec]:
        return _parse_algorithms(self.algorithms, self.alphas)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["solver"] = asdict(self.solver)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        solver = data.pop("solver", None)
        if solver is not None and not isinstance(solver, SolverConfig):
            solver = dict(solver)
            cont = solver.pop("continuation", None)
            if cont is not None and not isinstance(cont, ContinuationConfig):
                cont = ContinuationConfig(**cont)
            solver = SolverConfig(**solver, continuation=cont or ContinuationConfig())
        for key in ("algorithms", "alphas", "rhos", "ranks", "scale"):
            if key in data and data[key] is not None:
                data[key] = tuple(data[key])
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise DomainError(f"unknown config fields: {sorted(unknown)}")
        if solver is not None:
            data["solver"] = solver
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise DataError(f"no such config file: {path}")
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    trials: list[TrialRecord]
    aggregates: list[dict]
    ecdf: dict[str, list[float]]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "trials": [t.to_dict() for t in self.trials],
            "aggregates": self.aggregates,
            "ecdf": self.ecdf,
        }


def _trial_cfg(base: SolverConfig, trial_seed: int) -> SolverConfig:
    return replace(base, seed=trial_seed)


def _run_algorithm(
    spec: AlgorithmSpec,
    obs: MaskedMatrix,
    cfg: SolverConfig,
    rng: Rng,
    mf_rank: int,
    mf_reg: float,
) -> tuple[np.ndarray, float]:
    """Run one completion; returns (matrix, completion-only wall clock)."""
    t0 = time.perf_counter()
    if spec.kind == "nn":
        result = nn_complete(obs, cfg)
        return result.matrix, time.perf_counter() - t0
    if spec.kind == "pgd":
        result = pgd_complete(obs, cfg)
        return result.matrix, time.perf_counter() - t0
    if spec.kind == "mf":
        result = mf_als_complete(obs, mf_rank, mf_reg, cfg)
        return result.matrix, time.perf_counter() - t0
    stage1 = "nn" if spec.kind == "csnn" else "pgd"
    report = csmc_complete(obs, spec.alpha, stage1, cfg, rng)
    return report.m_hat, report.elapsed["stage1"] + report.elapsed["stage2"]


def _synth_trials(config: ExperimentConfig, specs):
    records = []
    for rank in config.ranks:
        for rho in config.rhos:
            for trial in range(config.n_trials):
                trial_seed = config.seed + trial
                truth = gen_synthetic(
                    SyntheticSpec(
                        config.n1,
                        config.n2,
                        rank,
                        config.noise_density,
                        config.noise_scale,
                        seed=trial_seed,
                    )
                )
                mask = sample_mask(
                    config.n1, config.n2, rho, Rng(trial_seed).child(_STREAM_MASK)
                )
                obs = MaskedMatrix.from_dense(truth, mask)
                for spec in specs:
                    cfg = _trial_cfg(config.solver, trial_seed)
                    rng = Rng(trial_seed).child(_STREAM_COLUMNS)
                    try:
                        m_hat, elapsed = _run_algorithm(
                            spec, obs, cfg, rng, config.mf_rank or rank, config.mf_reg
                        )
                        rec = TrialRecord(
                            trial, spec.label, spec.alpha, rho, rank,
                            relative_error(m_hat, truth), elapsed,
                        )
                    except (CsmcError, np.linalg.LinAlgError) as exc:
                        rec = TrialRecord(
                            trial, spec.label, spec.alpha, rho, rank,
                            math.nan, math.nan, error=str(exc),
                        )
                    records.append(rec)
    return records


def _movielens_trials(config: ExperimentConfig, specs):
    if config.data_path is None:
        raise DataError("movielens suite needs data_path pointing at ratings.csv")
    ratings = load_movielens(
        config.data_path, scale=config.scale, sidecar_dir=config.out_dir
    )
    obs = ratings.matrix
    m_min, m_max = ratings.scale
    mf_rank = config.mf_rank or config.ranks[0]
    records = []
    for trial in range(config.n_trials):
        trial_seed = config.seed + trial
        train_mask, test_mask = split_train_test(
            obs.mask, config.train_fraction, Rng(trial_seed).child(_STREAM_SPLIT)
        )
        train = MaskedMatrix(obs.values, train_mask)
        actual = obs.values[test_mask.rows, test_mask.cols]
        for spec in specs:
            cfg = _trial_cfg(config.solver, trial_seed)
            rng = Rng(trial_seed).child(_STREAM_COLUMNS)
            try:
                m_hat, elapsed = _run_algorithm(spec, train, cfg, rng, mf_rank, config.mf_reg)
                pred = m_hat[test_mask.rows, test_mask.cols]
                pairs = np.column_stack([pred, actual])
                eps = float(np.linalg.norm(pred - actual) / np.linalg.norm(actual))
                rec = TrialRecord(
                    trial, spec.label, spec.alpha, obs.density, None, eps, elapsed,
                    extra={
                        "nmae": nmae(pairs, m_min, m_max),
                        "hr": hit_rate(pairs, m_min, m_max),
                    },
                )
            except (CsmcError, np.linalg.LinAlgError) as exc:
                rec = TrialRecord(
                    trial, spec.label, spec.alpha, obs.density, None,
                    math.nan, math.nan, error=str(exc),
                )
            records.append(rec)
    return records, ratings.provenance


def _image_paths(data_path: str) -> list[Path]:
    path = Path(data_path)
    if path.is_dir():
        found = sorted(p for p in path.iterdir() if p.suffix.lower() in (".png", ".pgm"))
        if not found:
            raise DataError(f"no .png or .pgm images in {path}")
        return found
    if not path.exists():
        raise DataError(f"no such file: {path}")
    return [path]


def _inpaint_trials(config: ExperimentConfig, specs):
    if config.data_path is None:
        raise DataError("inpaint suite needs data_path pointing at an image or directory")
    records = []
    for image_path in _image_paths(config.data_path):
        truth = load_image_gray(image_path, sidecar_dir=config.out_dir)
        n1, n2 = truth.shape
        for rho in config.rhos:
            for trial in range(config.n_trials):
                trial_seed = config.seed + trial
                mask = sample_mask(n1, n2, rho, Rng(trial_seed).child(_STREAM_MASK))
                obs = MaskedMatrix.from_dense(truth, mask)
                for spec in specs:
                    cfg = _trial_cfg(config.solver, trial_seed)
                    rng = Rng(trial_seed).child(_STREAM_COLUMNS)
                    try:
                        m_hat, elapsed = _run_algorithm(
                            spec, obs, cfg, rng, config.mf_rank or config.ranks[0],
                            config.mf_reg,
                        )
                        rec = TrialRecord(
                            trial, spec.label, spec.alpha, rho, None,
                            relative_error(m_hat, truth), elapsed,
                            extra={"snr": snr(m_hat, truth)},
                        )
                    except (CsmcError, np.linalg.LinAlgError) as exc:
                        rec = TrialRecord(
                            trial, spec.label, spec.alpha, rho, None,
                            math.nan, math.nan, error=str(exc),
                        )
                    records.append(rec)
    return records


def _group_key(rec: TrialRecord) -> tuple:
    return (rec.algorithm, rec.alpha, rec.rho, rec.rank)


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def _aggregate(records: list[TrialRecord]) -> list[dict]:
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault(_group_key(rec), []).append(rec)
    out = []
    for (algorithm, alpha, rho, rank), recs in groups.items():
        ok = [r for r in recs if r.error is None and not math.isnan(r.epsilon)]
        row = {
            "algorithm": algorithm,
            "alpha": alpha,
            "rho": rho,
            "rank": rank,
            "n_trials": len(recs),
            "n_failed": len(recs) - len(ok),
        }
        if ok:
            for name, values in (
                ("epsilon", [r.epsilon for r in ok]),
                ("elapsed_s", [r.elapsed_s for r in ok]),
            ):
                mean, std = _mean_std(values)
                row[f"{name}_mean"], row[f"{name}_std"] = mean, std
            for metric in ("nmae", "hr", "snr"):
                if all(metric in r.extra for r in ok):
                    mean, std = _mean_std([r.extra[metric] for r in ok])
                    row[f"{metric}_mean"], row[f"{metric}_std"] = mean, std
        out.append(row)
    return out


def _ecdf_samples(records: list[TrialRecord]) -> dict[str, list[float]]:
    curves: dict[str, list[float]] = {}
    for rec in records:
        if rec.error is not None or math.isnan(rec.epsilon):
            continue
        key = f"{rec.algorithm}|rho={rec.rho:g}|rank={rec.rank if rec.rank is not None else 'NA'}"
        curves.setdefault(key, []).append(rec.epsilon)
    return {k: sorted(v) for k, v in curves.items()}


def run_suite(config: ExperimentConfig) -> ExperimentReport:
    """Execute every (algorithm, parameter, trial) cell of the configured
    suite, write report.json / trials.csv / plot CSVs to config.out_dir, and
    return the in-memory report. Individual trial failures are recorded as
    failed rows; the suite keeps going."""
    specs = config.specs()
    extra_provenance = None
    if config.suite == "synth":
        records = _synth_trials(config, specs)
    elif config.suite == "movielens":
        records, extra_provenance = _movielens_trials(config, specs)
    else:
        records = _inpaint_trials(config, specs)

    report = ExperimentReport(
        config=config,
        trials=records,
        aggregates=_aggregate(records),
        ecdf=_ecdf_samples(records),
    )
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = report.to_dict()
    if extra_provenance is not None:
        payload["data_provenance"] = extra_provenance
    matrix_io.write_json(payload, out_dir / "report.json")
    write_trials_csv(records, out_dir / "trials.csv")
    emit_plots_data(report, out_dir)
    return report


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_plots_data(report: ExperimentReport, out_dir) -> list[Path]:
    """Write per-figure CSVs: one ECDF file per (algorithm, rho, rank) cell,
    plus runtimes.csv and metrics.csv with per-cell aggregate columns."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    for key, errors in report.ecdf.items():
        algo, rho_part, rank_part = key.split("|")
        rho = rho_part.removeprefix("rho=")
        rank = rank_part.removeprefix("rank=")
        path = out_dir / f"ecdf_{algo}_{rho}_{rank}.csv"
        with open(path, "w") as fh:
            fh.write("a,F_hat\n")
            for a, f in ecdf_points(errors):
                fh.write(f"{repr(a)},{repr(f)}\n")
        written.append(path)

    runtimes = out_dir / "runtimes.csv"
    with open(runtimes, "w") as fh:
        fh.write("algorithm,alpha,rho,rank,elapsed_s_mean,elapsed_s_std\n")
        for row in report.aggregates:
            fh.write(
                ",".join(
                    _fmt(row.get(c))
                    for c in ("algorithm", "alpha", "rho", "rank", "elapsed_s_mean", "elapsed_s_std")
                )
                + "\n"
            )
    written.append(runtimes)

    metric_cols = ["epsilon"]
    for metric in ("nmae", "hr", "snr"):
        if any(f"{metric}_mean" in row for row in report.aggregates):
            metric_cols.append(metric)
    metrics_path = out_dir / "metrics.csv"
    with open(metrics_path, "w") as fh:
        header = ["algorithm", "alpha", "rho", "rank"]
        for m in metric_cols:
            header += [f"{m}_mean", f"{m}_std"]
        fh.write(",".join(header) + "\n")
        for row in report.aggregates:
            cells = [_fmt(row.get(c)) for c in ("algorithm", "alpha", "rho", "rank")]
            for m in metric_cols:
                cells += [_fmt(row.get(f"{m}_mean")), _fmt(row.get(f"{m}_std"))]
            fh.write(",".join(cells) + "\n")
    written.append(metrics_path)
    return written


def run_complete(
    input_path,
    solver: str = "nn",
    alpha: float | None = None,
    cfg: SolverConfig | None = None,
    ground_truth_path=None,
    output_path=None,
) -> dict:
    """Single-shot completion of a matrix file (CSV with nan holes or
    MatrixMarket). With alpha set, runs the two-stage pipeline; otherwise the
    plain solver. Writes the completed dense CSV when output_path is given."""
    cfg = cfg or SolverConfig()
    obs = matrix_io.read_matrix(input_path)
    if alpha is not None:
        report = csmc_complete(obs, alpha, solver, cfg, Rng(cfg.seed))
        m_hat = report.m_hat
        elapsed = report.elapsed
        flags = list(report.stage1.flags)
    else:
        if solver not in ("nn", "pgd"):
            raise DomainError(f"unknown solver {solver!r}")
        result = nn_complete(obs, cfg) if solver == "nn" else pgd_complete(obs, cfg)
        m_hat = result.matrix
        elapsed = result.elapsed
        flags = list(result.flags)
    out = {
        "input": str(input_path),
        "solver": solver,
        "alpha": alpha,
        "shape": list(obs.shape),
        "density": obs.density,
        "elapsed": elapsed,
        "flags": flags,
    }
    if ground_truth_path is not None:
        truth = matrix_io.read_dense_csv(ground_truth_path)
        out["epsilon"] = relative_error(m_hat, truth)
    if output_path is not None:
        matrix_io.write_dense_csv(m_hat, output_path)
        out["output"] = str(output_path)
    return out


def run_diagnose(input_path, gamma: float = 3.0, rank_tol: float = 1e-10) -> dict:
    """Coherence/conditioning diagnostics and recovery bounds for a matrix
    file. The matrix is treated as ground truth; the submatrix coherence is
    approximated by the full matrix's (the a-priori inflation bound is
    reported alongside)."""
    obs = matrix_io.read_matrix(input_path)
    mu0, r = coherence(obs.values, rank_tol)
    kappa = condition_number(obs.values, rank_tol)
    bounds = recovery_bounds(
        obs.shape[0], obs.shape[1], r, r, mu0, mu0, kappa, gamma
    )
    return {
        "input": str(input_path),
        "shape": list(obs.shape),
        "density": obs.density,
        "rank": r,
        "mu0": mu0,
        "condition_number": kappa,
        "gamma": gamma,
        **bounds.to_dict(),
    }
