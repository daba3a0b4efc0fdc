"""Command-line entry point.

Subcommands: datagen, solve, sketch-solve, experiment, bounds, verify.
Outputs are line-oriented `name value` pairs; --json switches every
subcommand to a single JSON object.  Exit codes: 0 success, 1 usage
error, 2 data or parse error, 3 numerical failure, 4 verification
tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bounds import BoundInputs, BoundReport, evaluate_report
from .config import load_config
from .core import ProblemInstance, snr, solve_exact
from .dataio import FORMATS, DatasetFile, load, save_dense_csv, write_results_csv
from .datagen import SyntheticSpec, gen_gaussian_data
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateNoiseError,
    InvalidSketchSizeError,
    InvalidWeightsError,
    NotSpdError,
    RankDeficientError,
)
from .estimators import classical, js_oracle, positive_part, shrinkage, shrinkage_alt
from .harness import (
    SteinInstance,
    run_experiment,
    verify_gram_identity,
    verify_residual_unbiased,
    verify_stein,
)
from .sketches import FAMILIES, SketchSpec, apply, derive_seed, make_operator

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3
EXIT_TOLERANCE = 4

_DATA_ERRORS = (DataFormatError, ConfigError, OSError)
_NUMERICAL_ERRORS = (RankDeficientError, InvalidWeightsError, InvalidSketchSizeError,
                     DegenerateNoiseError, NotSpdError, np.linalg.LinAlgError)


class UsageError(Exception):
    """Flag combination rejected after argparse accepted the syntax."""

_VECTOR_ESTIMATORS = ("classical", "js-oracle", "shrinkage", "shrinkage-alt", "positive-part")


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(args, pairs: dict) -> None:
    if args.json:
        print(json.dumps(pairs, sort_keys=True))
        return
    for key, value in pairs.items():
        if isinstance(value, (list, tuple)):
            print(key, " ".join(repr(float(v)) for v in value))
        elif isinstance(value, float):
            print(key, repr(value))
        else:
            print(key, value)


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("SKETCHLS_THREADS")
    return int(env) if env else 1


def _cmd_datagen(args) -> int:
    spec = SyntheticSpec(n=args.n, d=args.d, rho=args.rho, seed=args.seed)
    instance, sol = gen_gaussian_data(spec)
    save_dense_csv(instance, args.out)
    _emit(args, {"n": args.n, "d": args.d, "rho": args.rho, "r2": sol.r2, "out": args.out})
    return EXIT_OK


def _solution_pairs(instance: ProblemInstance) -> dict:
    sol = solve_exact(instance)
    rho = snr(sol)
    return {
        "x_ls": [float(v) for v in np.ravel(sol.x_ls)],
        "r2": sol.r2,
        "snr": rho if math.isfinite(rho) else "inf",
    }


def _cmd_solve(args) -> int:
    instance = load(DatasetFile(path=args.data, format=args.format))
    pairs = _solution_pairs(instance)
    _emit(args, pairs)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(pairs, fh, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def _cmd_sketch_solve(args) -> int:
    instance = load(DatasetFile(path=args.data, format=args.format))
    A, y, n, d, m = instance.A, instance.y, instance.n, instance.d, args.m
    needs_aux = args.family in ("rownorm", "leverage")
    op = make_operator(SketchSpec(args.family, m, args.seed), n, aux=A if needs_aux else None)
    SA = apply(op, A)
    Sy = apply(op, y)
    rec0 = classical(SA, Sy)
    sol = solve_exact(instance)
    if args.estimator == "classical":
        rec = rec0
    elif args.estimator == "js-oracle":
        rec = js_oracle(rec0.x_hat, SA, sol.r2, d, m)
    elif args.estimator == "shrinkage":
        rec = shrinkage(rec0.x_hat, SA, A, y, d, m)
    elif args.estimator == "shrinkage-alt":
        rec = shrinkage_alt(rec0.x_hat, SA, Sy, d, m)
    else:
        rec = positive_part(rec0.x_hat, SA, A, y, d, m)
    diff = A @ (rec.x_hat - sol.x_ls)
    pairs = {
        "estimator": rec.kind,
        "shrink_factor": rec.shrink_factor,
        "r2_estimate": rec.r2_estimate if rec.r2_estimate is not None else "NA",
        "degenerate": str(rec.degenerate).lower(),
        "x_hat": [float(v) for v in rec.x_hat],
        "pred_err": float(np.sum(diff * diff)),
    }
    _emit(args, pairs)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    result = run_experiment(cfg, threads=_threads(args))
    write_results_csv(result.cells, cfg.out_path)
    _emit(args, {
        "cells": len(result.cells),
        "n": result.n,
        "d": result.d,
        "r2": result.r2,
        "rho": result.rho,
        "out": cfg.out_path,
    })
    return EXIT_OK


def _report_pairs(report: BoundReport) -> dict:
    pairs = {}
    for name in BoundReport.FIELDS:
        value = getattr(report, name)
        if value is None:
            pairs[name] = f"NA ({report.reasons[name]})"
        elif name in report.reasons:
            pairs[name] = f"{value!r} ({report.reasons[name]})"
        else:
            pairs[name] = value
    return pairs


def _cmd_bounds(args) -> int:
    if args.B is not None and args.eta2 is not None:
        raise UsageError("give --B or --eta2, not both")
    if args.B is not None and args.sigma_min is None:
        raise UsageError("--B needs --sigma-min")
    if args.eta2 is not None and (args.sigma_min is None or args.sigma_max is None):
        raise UsageError("--eta2 needs --sigma-min and --sigma-max")
    inputs = BoundInputs(
        d=args.d, m=args.m, r2=args.r2, rho=args.rho,
        sigma_min=args.sigma_min, sigma_max=args.sigma_max,
        B=args.B if args.B is not None else math.inf,
        eta2=args.eta2, eps=args.eps,
    )
    _emit(args, _report_pairs(evaluate_report(inputs)))
    return EXIT_OK


def _verify_result(args, pairs: dict, passed: bool) -> int:
    pairs["tolerance"] = pairs.get("tolerance", args.tol)
    pairs["status"] = "PASS" if passed else "FAIL"
    _emit(args, pairs)
    return EXIT_OK if passed else EXIT_TOLERANCE


def _cmd_verify_stein(args) -> int:
    rng = np.random.default_rng(args.seed)
    eigvals = np.geomspace(1.0, args.cond, args.d)
    Q, _ = np.linalg.qr(rng.standard_normal((args.d, args.d)))
    sigma = (Q * eigvals) @ Q.T
    direction = rng.standard_normal(args.d)
    theta = args.theta_norm * direction / np.linalg.norm(direction)
    lhs, rhs = verify_stein(SteinInstance(theta=theta, sigma=sigma,
                                          samples=args.samples, seed=args.seed))
    rel = abs(lhs - rhs) / abs(rhs)
    return _verify_result(args, {"lhs": lhs, "rhs": rhs, "rel_diff": rel}, rel <= args.tol)


def _cmd_verify_residual(args) -> int:
    instance, sol = gen_gaussian_data(SyntheticSpec(n=args.n, d=args.d, rho=args.rho,
                                                    seed=derive_seed(args.seed, "datagen")))
    mean_full, mean_sketched = verify_residual_unbiased(
        instance, sol, args.family, args.m, args.reps, args.seed)
    rel_full = abs(mean_full - sol.r2) / sol.r2
    rel_sketched = abs(mean_sketched - sol.r2) / sol.r2
    passed = rel_full <= args.tol and rel_sketched <= args.tol
    return _verify_result(args, {
        "r2": sol.r2,
        "mean_full": mean_full,
        "mean_sketched": mean_sketched,
        "rel_diff_full": rel_full,
        "rel_diff_sketched": rel_sketched,
    }, passed)


def _cmd_verify_gram(args) -> int:
    deviation = verify_gram_identity(args.family, args.n, args.m, args.reps, args.seed)
    return _verify_result(args, {"max_deviation": deviation}, deviation <= args.tol)


def build_parser() -> _Parser:
    parser = _Parser(prog="sketchls", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sketchls {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="emit one JSON object")

    p = sub.add_parser("datagen", help="write a synthetic instance as dense CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(fn=_cmd_datagen)

    p = sub.add_parser("solve", help="exact least-squares solution of a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", help="also write the solution as JSON to this path")
    common(p)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("sketch-solve", help="sketch the data and run one estimator")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--estimator", choices=_VECTOR_ESTIMATORS, default="shrinkage")
    common(p)
    p.set_defaults(fn=_cmd_sketch_solve)

    p = sub.add_parser("experiment", help="run a Monte Carlo sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int, help="worker cap (default: SKETCHLS_THREADS or 1)")
    common(p)
    p.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("bounds", help="evaluate every closed-form bound")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--rho", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--eta2", type=float)
    p.add_argument("--sigma-min", dest="sigma_min", type=float)
    p.add_argument("--sigma-max", dest="sigma_max", type=float)
    p.add_argument("--eps", type=float, default=0.0)
    common(p)
    p.set_defaults(fn=_cmd_bounds)

    p = sub.add_parser("verify", help="Monte Carlo verification gates")
    vsub = p.add_subparsers(dest="check", required=True)

    v = vsub.add_parser("stein", help="shrinkage error identity")
    v.add_argument("--d", type=int, default=10)
    v.add_argument("--samples", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--theta-norm", dest="theta_norm", type=float, default=0.0)
    v.add_argument("--cond", type=float, default=100.0)
    v.add_argument("--tol", type=float, default=0.02)
    common(v)
    v.set_defaults(fn=_cmd_verify_stein)

    v = vsub.add_parser("residual", help="residual-estimate unbiasedness")
    v.add_argument("--n", type=int, default=256)
    v.add_argument("--d", type=int, default=20)
    v.add_argument("--rho", type=float, default=1.0)
    v.add_argument("--family", choices=FAMILIES, default="gaussian")
    v.add_argument("--m", type=int, default=60)
    v.add_argument("--reps", type=int, default=500)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=0.02)
    common(v)
    v.set_defaults(fn=_cmd_verify_residual)

    v = vsub.add_parser("gram", help="Gram identity E[S^T S] = I")
    v.add_argument("--family", choices=FAMILIES, required=True)
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--m", type=int, required=True)
    v.add_argument("--reps", type=int, default=10_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=0.05)
    common(v)
    v.set_defaults(fn=_cmd_verify_gram)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
