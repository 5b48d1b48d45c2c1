"""Command-line benchmark runner and single-shot completion.

Subcommands: complete, synth-bench, recommend, inpaint, diagnose. Exit codes:
0 success, 1 usage error, 2 data error, 3 solver divergence.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .errors import CsmcError, DataError, DivergenceError, DomainError
from .experiments import (
    ExperimentConfig,
    run_complete,
    run_diagnose,
    run_suite,
)
from .io import write_json
from .solvers import SolverConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3

_SUITE_BY_COMMAND = {"synth-bench": "synth", "recommend": "movielens", "inpaint": "inpaint"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON experiment config; flags override")
    parser.add_argument("--alpha", type=_float_list, metavar="A[,A...]",
                        help="column-sampling ratio grid for two-stage algorithms")
    parser.add_argument("--rho", type=_float_list, metavar="R[,R...]",
                        help="observed-entry density grid")
    parser.add_argument("--rank", type=_int_list, metavar="K[,K...]", help="rank grid")
    parser.add_argument("--trials", type=int, metavar="N", help="trials per cell")
    parser.add_argument("--seed", type=int, metavar="S", help="root seed")
    parser.add_argument("--solver", choices=("pgd", "nn"),
                        help="stage-one / single-stage solver")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--threads", type=int, metavar="N",
                        help="worker threads for per-column solves")
    parser.add_argument("--algorithms", metavar="A[,A...]",
                        help="comma list: nn, pgd, mf, csnn[-a], cspgd[-a]")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csmc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("complete", help="complete one matrix file")
    p.add_argument("input", help="matrix file (.csv with nan holes, or .mtx)")
    p.add_argument("--ground-truth", metavar="PATH", help="dense CSV to score against")
    p.add_argument("--output", metavar="PATH", help="write the completed dense CSV here")
    _add_common(p)

    for name, blurb in (
        ("synth-bench", "random low-rank recovery benchmark"),
        ("recommend", "rating-prediction benchmark on a MovieLens CSV"),
        ("inpaint", "image inpainting benchmark"),
    ):
        p = sub.add_parser(name, help=blurb)
        if name != "synth-bench":
            p.add_argument("--data", metavar="PATH", help="dataset path")
        else:
            p.add_argument("--shape", type=_int_list, metavar="N1,N2",
                           help="synthetic matrix shape")
        _add_common(p)

    p = sub.add_parser("diagnose", help="coherence and recovery-bound report")
    p.add_argument("input", help="matrix file")
    p.add_argument("--gamma", type=float, default=3.0,
                   help="failure-probability exponent (default 3.0)")
    p.add_argument("--rank-tol", type=float, default=1e-10,
                   help="relative singular-value cutoff for numerical rank")
    _add_common(p)
    return parser


def _build_config(args, suite: str) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.from_file(args.config)
        if config.suite != suite:
            config = replace(config, suite=suite)
    else:
        config = ExperimentConfig(suite=suite)
    overrides = {}
    if args.algorithms:
        overrides["algorithms"] = tuple(t.strip() for t in args.algorithms.split(","))
    if args.alpha:
        overrides["alphas"] = tuple(args.alpha)
    if args.rho:
        overrides["rhos"] = tuple(args.rho)
    if args.rank:
        overrides["ranks"] = tuple(args.rank)
    if args.trials is not None:
        overrides["n_trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out:
        overrides["out_dir"] = args.out
    if getattr(args, "data", None):
        overrides["data_path"] = args.data
    if getattr(args, "shape", None):
        if len(args.shape) != 2:
            raise DomainError("--shape takes exactly two integers")
        overrides["n1"], overrides["n2"] = args.shape
    solver = config.solver
    if args.threads is not None:
        solver = replace(solver, threads=args.threads)
    if solver is not config.solver:
        overrides["solver"] = solver
    if overrides:
        config = replace(config, **overrides)
    return config


def _solver_cfg(args) -> SolverConfig:
    cfg = SolverConfig()
    if args.config:
        cfg = ExperimentConfig.from_file(args.config).solver
    if args.threads is not None:
        cfg = replace(cfg, threads=args.threads)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _print_summary(report) -> None:
    for row in report.aggregates:
        label = row["algorithm"]
        cell = f"rho={row['rho']:g}" if row["rho"] is not None else ""
        if row["rank"] is not None:
            cell += f" rank={row['rank']}"
        stats = ""
        if "epsilon_mean" in row:
            stats = f"epsilon {row['epsilon_mean']:.3e} +/- {row['epsilon_std']:.1e}"
            stats += f", time {row['elapsed_s_mean']:.2f}s"
        for metric in ("nmae", "hr", "snr"):
            if f"{metric}_mean" in row:
                stats += f", {metric} {row[f'{metric}_mean']:.4f}"
        failed = f" [{row['n_failed']} failed]" if row["n_failed"] else ""
        print(f"{label:>12} {cell:<18} {stats}{failed}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "complete":
            cfg = _solver_cfg(args)
            alpha = args.alpha[0] if args.alpha else None
            out = run_complete(
                args.input,
                solver=args.solver or "nn",
                alpha=alpha,
                cfg=cfg,
                ground_truth_path=args.ground_truth,
                output_path=args.output,
            )
            print(json.dumps(out, indent=2))
        elif args.command == "diagnose":
            out = run_diagnose(args.input, gamma=args.gamma, rank_tol=args.rank_tol)
            if args.out:
                out_dir = Path(args.out)
                out_dir.mkdir(parents=True, exist_ok=True)
                write_json(out, out_dir / "diagnose.json")
            print(json.dumps(out, indent=2))
        else:
            config = _build_config(args, _SUITE_BY_COMMAND[args.command])
            report = run_suite(config)
            _print_summary(report)
            print(f"report written to {Path(config.out_dir).resolve()}")
    except DivergenceError as exc:
        print(f"csmc: solver diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (DataError, FileNotFoundError) as exc:
        print(f"csmc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CsmcError as exc:
        print(f"csmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
