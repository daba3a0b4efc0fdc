"""Seeded Monte Carlo experiments and identity-verification checks.

`run_experiment` sweeps (sketch family x sketch size x estimator) with a
paired design: within one repetition every estimator sees the same
sketch realization, which sharply reduces the variance of estimator
comparisons.  Per-repetition seeds are derived from the master seed and
the cell key alone, so results are independent of thread count and
iteration order, and any cell can be replayed in isolation.

The verify_* functions are direct Monte Carlo checks of the identities
the estimators rely on (shrinkage error identity, residual-estimate
unbiasedness, the Gram identity E[S^T S] = I).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bounds as bounds_mod
from . import estimators as est_mod
from .core import ExactSolution, ProblemInstance, prediction_error, snr, solve_exact
from .datagen import SyntheticSpec, add_noise, gen_gaussian_data
from .dataio import DatasetFile, load
from .errors import ConfigError, NotSpdError, SketchLSError
from .sketches import FAMILIES, SketchSpec, apply, as_matrix, derive_seed, make_operator

_MATRIX_KINDS = ("classical", "shrinkage-fro")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a data source and the grid to sweep over it."""

    source: SyntheticSpec | DatasetFile
    families: tuple[str, ...]
    m_values: tuple[int, ...]
    estimators: tuple[str, ...]
    reps: int = 100
    master_seed: int = 0
    kappa: float = 0.0
    two_sketch: bool = False
    eps_for_bounds: float = 0.0
    out_path: str | None = None

    def __post_init__(self):
        for f in self.families:
            if f not in FAMILIES:
                raise ConfigError(f"unknown sketch family {f!r}")
        for e in self.estimators:
            if e not in est_mod.KINDS:
                raise ConfigError(f"unknown estimator {e!r}")
        if not self.families or not self.m_values or not self.estimators:
            raise ConfigError("families, m_values, and estimators must be nonempty")
        if list(self.m_values) != sorted(self.m_values):
            raise ConfigError("m_values must be ascending")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.kappa < 0 or self.eps_for_bounds < 0:
            raise ConfigError("kappa and bounds eps must be nonnegative")


@dataclass(frozen=True)
class CellResult:
    """Statistics for one (family, m, estimator) cell.

    Errors are normalized by the row count n.  `reps` counts successful
    repetitions; `skipped` carries the reason when the cell was not
    evaluated.  Per-rep logs are retained for replay checks and paired
    comparisons.
    """

    family: str
    m: int
    estimator: str
    reps: int
    mean_pred_err: float | None
    std_pred_err: float | None
    mean_sa_err: float | None
    std_sa_err: float | None
    mean_shrink_factor: float | None
    bound_exact_classical: float | None
    bound_lower_general: float | None
    bound_upper_sa: float | None
    rep_seeds: tuple[int, ...] = ()
    per_rep_pred_err: tuple[float, ...] = ()
    per_rep_sa_err: tuple[float, ...] = ()
    per_rep_factor: tuple[float, ...] = ()
    skipped: str | None = None


@dataclass(frozen=True)
class ExperimentResult:
    """All cells of one run plus the instance-level constants."""

    cells: tuple[CellResult, ...]
    n: int
    d: int
    r2: float
    rho: float
    master_seed: int

    def cell(self, family: str, m: int, estimator: str) -> CellResult:
        for c in self.cells:
            if (c.family, c.m, c.estimator) == (family, m, estimator):
                return c
        raise KeyError((family, m, estimator))


def resolve_instance(cfg: ExperimentConfig) -> tuple[ProblemInstance, ExactSolution]:
    """Materialize the data source, applying target noise if requested."""
    if isinstance(cfg.source, SyntheticSpec):
        instance, sol = gen_gaussian_data(cfg.source)
    elif isinstance(cfg.source, DatasetFile):
        instance = load(cfg.source)
        sol = solve_exact(instance)
    else:
        raise ConfigError(f"unsupported source type {type(cfg.source).__name__}")
    if cfg.kappa > 0:
        instance = add_noise(instance, cfg.kappa, derive_seed(cfg.master_seed, "noise"))
        sol = solve_exact(instance)
    return instance, sol


def _estimator_records(kind, rec0, SA, St, instance, sol, d, m, aux_residuals):
    """Build the record for one estimator kind on a shared realization."""
    A, target = instance.A, instance.target
    if kind == "classical":
        return rec0
    if kind == "js-oracle":
        return est_mod.js_oracle(rec0.x_hat, SA, sol.r2, d, m)
    if kind == "shrinkage":
        return est_mod.shrinkage(rec0.x_hat, SA, A, target, d, m,
                                 residual_sq=aux_residuals.get("full"))
    if kind == "shrinkage-alt":
        return est_mod.shrinkage_alt(rec0.x_hat, SA, St, d, m,
                                     residual_sq=aux_residuals.get("sketched"))
    if kind == "positive-part":
        return est_mod.positive_part(rec0.x_hat, SA, A, target, d, m,
                                     residual_sq=aux_residuals.get("full"))
    if kind == "shrinkage-fro":
        return est_mod.shrinkage_matrix(rec0.x_hat, SA, A, target, d, m,
                                        residual_sq=aux_residuals.get("full"))
    raise ConfigError(f"unknown estimator {kind!r}")


def _run_rep(instance, sol, family, m, seed, aux_seed, estimators, two_sketch):
    """One repetition of one cell: returns {kind: (pred/n, sa/n, factor)}."""
    A, target, n, d = instance.A, instance.target, instance.n, instance.d
    needs_aux = family in ("rownorm", "leverage")
    op = make_operator(SketchSpec(family, m, seed), n, aux=A if needs_aux else None)
    SA = apply(op, A)
    St = apply(op, target)
    rec0 = est_mod.classical(SA, St)

    aux_residuals: dict = {}
    if two_sketch:
        op2 = make_operator(SketchSpec(family, m, aux_seed), n, aux=A if needs_aux else None)
        SA2 = apply(op2, A)
        St2 = apply(op2, target)
        rec_aux = est_mod.classical(SA2, St2)
        diff_full = A @ rec_aux.x_hat - target
        aux_residuals["full"] = float(np.sum(diff_full * diff_full))
        diff_skt = SA2 @ rec_aux.x_hat - St2
        aux_residuals["sketched"] = float(np.sum(diff_skt * diff_skt))

    out = {}
    for kind in estimators:
        rec = _estimator_records(kind, rec0, SA, St, instance, sol, d, m, aux_residuals)
        pred = prediction_error(A, rec.x_hat, sol.x_ls) / n
        sa_diff = SA @ (rec.x_hat - sol.x_ls)
        sa = float(np.sum(sa_diff * sa_diff)) / n
        out[kind] = (pred, sa, rec.shrink_factor)
    return out


def _cell_gate(kind: str, d: int, m: int, is_matrix: bool) -> str | None:
    """Reason the cell must be skipped, or None when it is runnable."""
    if is_matrix and kind not in _MATRIX_KINDS:
        return f"{kind} is undefined for matrix targets"
    if kind == "classical":
        return f"m={m} < d={d}: sketched problem is rank deficient" if m < d else None
    # shrinkage-family cells share the m > d+3 domain of their bound formulas
    if m <= d + 3:
        return f"m={m} <= d+3={d + 3}: shrinkage domain (and its bounds) undefined"
    return None


def _bound_columns(d, m, r2, rho, n):
    """Bound values on the same 1/n scale as the error columns."""
    try:
        exact = bounds_mod.exact_classical_error(d, m, r2) / n
    except SketchLSError:
        exact = None
    lower, _ = bounds_mod.general_lower_bound(d, m, r2)
    lower /= n
    try:
        upper = bounds_mod.upper_bound_sa(d, m, r2, rho) / n
    except SketchLSError:
        upper = None
    return exact, lower, upper


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run the full sweep; statistics are invariant to the thread count.

    Failed repetitions mark their cell with the failure reason instead of
    aborting the run.  Requested cells whose (d, m) fall outside an
    estimator's domain are recorded as skipped, not failed.
    """
    instance, sol = resolve_instance(cfg)
    n, d = instance.n, instance.d
    r2, rho = sol.r2, snr(sol)
    is_matrix = instance.Y is not None

    cells: list[CellResult] = []
    pool = ThreadPoolExecutor(max_workers=max(1, threads)) if threads > 1 else None
    try:
        for family in cfg.families:
            for m in cfg.m_values:
                b_exact, b_lower, b_upper = _bound_columns(d, m, r2, rho, n)
                seeds = tuple(derive_seed(cfg.master_seed, family, m, r) for r in range(cfg.reps))
                aux_seeds = tuple(derive_seed(cfg.master_seed, family, m, r, "aux")
                                  for r in range(cfg.reps))
                runnable = [k for k in cfg.estimators
                            if _cell_gate(k, d, m, is_matrix) is None]
                for kind in cfg.estimators:
                    reason = _cell_gate(kind, d, m, is_matrix)
                    if reason is not None:
                        cells.append(CellResult(
                            family=family, m=m, estimator=kind, reps=0,
                            mean_pred_err=None, std_pred_err=None,
                            mean_sa_err=None, std_sa_err=None,
                            mean_shrink_factor=None,
                            bound_exact_classical=b_exact,
                            bound_lower_general=b_lower,
                            bound_upper_sa=b_upper,
                            skipped=reason))
                if not runnable:
                    continue

                def one(r, _family=family, _m=m, _seeds=seeds, _aux=aux_seeds, _run=runnable):
                    try:
                        return _run_rep(instance, sol, _family, _m, _seeds[r], _aux[r],
                                        _run, cfg.two_sketch)
                    except SketchLSError as exc:
                        return exc

                if pool is not None:
                    rep_outputs = list(pool.map(one, range(cfg.reps)))
                else:
                    rep_outputs = [one(r) for r in range(cfg.reps)]

                failure = next((o for o in rep_outputs if isinstance(o, SketchLSError)), None)
                for kind in runnable:
                    if failure is not None:
                        cells.append(CellResult(
                            family=family, m=m, estimator=kind, reps=0,
                            mean_pred_err=None, std_pred_err=None,
                            mean_sa_err=None, std_sa_err=None,
                            mean_shrink_factor=None,
                            bound_exact_classical=b_exact,
                            bound_lower_general=b_lower,
                            bound_upper_sa=b_upper,
                            skipped=f"failed: {failure}"))
                        continue
                    pred = np.array([o[kind][0] for o in rep_outputs])
                    sa = np.array([o[kind][1] for o in rep_outputs])
                    fac = np.array([o[kind][2] for o in rep_outputs])
                    std_pred = float(np.std(pred, ddof=1)) if cfg.reps >= 2 else None
                    std_sa = float(np.std(sa, ddof=1)) if cfg.reps >= 2 else None
                    cells.append(CellResult(
                        family=family, m=m, estimator=kind, reps=cfg.reps,
                        mean_pred_err=float(pred.mean()), std_pred_err=std_pred,
                        mean_sa_err=float(sa.mean()), std_sa_err=std_sa,
                        mean_shrink_factor=float(fac.mean()),
                        bound_exact_classical=b_exact,
                        bound_lower_general=b_lower,
                        bound_upper_sa=b_upper,
                        rep_seeds=seeds,
                        per_rep_pred_err=tuple(pred.tolist()),
                        per_rep_sa_err=tuple(sa.tolist()),
                        per_rep_factor=tuple(fac.tolist())))
    finally:
        if pool is not None:
            pool.shutdown()
    return ExperimentResult(cells=tuple(cells), n=n, d=d, r2=r2, rho=rho,
                            master_seed=cfg.master_seed)


def replay_cell(cfg: ExperimentConfig, family: str, m: int) -> ExperimentResult:
    """Re-run a single cell of a sweep; seeds depend only on the cell key,
    so the per-rep logs reproduce the original run bitwise."""
    sub = ExperimentConfig(source=cfg.source, families=(family,), m_values=(m,),
                           estimators=cfg.estimators, reps=cfg.reps,
                           master_seed=cfg.master_seed, kappa=cfg.kappa,
                           two_sketch=cfg.two_sketch, eps_for_bounds=cfg.eps_for_bounds)
    return run_experiment(sub)


@dataclass(frozen=True)
class SteinInstance:
    """A Gaussian mean-estimation problem for the shrinkage error identity."""

    theta: np.ndarray
    sigma: np.ndarray
    samples: int
    seed: int

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "sigma", sigma)
        d = theta.shape[0]
        if theta.ndim != 1 or d <= 2:
            raise ValueError("theta must be a vector with d > 2")
        if sigma.shape != (d, d) or not np.allclose(sigma, sigma.T, atol=1e-12):
            raise NotSpdError("covariance must be symmetric d x d")
        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise NotSpdError("covariance is not positive definite") from None
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


def verify_stein(inst: SteinInstance) -> tuple[float, float]:
    """Monte Carlo check of the shrinkage error identity.

    Draws X ~ N(theta, Sigma) and shrinks each sample by
    1 - (d-2)/(X^T Sigma^-1 X).  Returns (lhs, rhs) where lhs is the
    sample mean of the normalized squared error of the shrunk estimate
    and rhs = d - (d-2)^2 * mean(1 / (X^T Sigma^-1 X)), both estimated
    from the same sample stream; they agree in expectation.
    """
    d = inst.theta.shape[0]
    rng = np.random.default_rng(inst.seed)
    L = np.linalg.cholesky(inst.sigma)
    X = inst.theta + rng.standard_normal((inst.samples, d)) @ L.T
    sigma_inv_Xt = np.linalg.solve(inst.sigma, X.T)
    quad = np.einsum("ij,ji->i", X, sigma_inv_Xt)
    factors = 1.0 - (d - 2) / quad
    diff = factors[:, None] * X - inst.theta
    sigma_inv_diff = np.linalg.solve(inst.sigma, diff.T)
    lhs = float(np.mean(np.einsum("ij,ji->i", diff, sigma_inv_diff)))
    rhs = float(d - (d - 2) ** 2 * np.mean(1.0 / quad))
    return lhs, rhs


def verify_residual_unbiased(p: ProblemInstance, sol: ExactSolution, family: str,
                             m: int, reps: int, seed: int) -> tuple[float, float]:
    """Monte Carlo means of the two residual-energy estimates; both target sol.r2."""
    A, target, n, d = p.A, p.target, p.n, p.d
    needs_aux = family in ("rownorm", "leverage")
    full = np.empty(reps)
    sketched = np.empty(reps)
    for r in range(reps):
        op = make_operator(SketchSpec(family, m, derive_seed(seed, family, m, r)), n,
                           aux=A if needs_aux else None)
        SA = apply(op, A)
        St = apply(op, target)
        rec = est_mod.classical(SA, St)
        full[r] = est_mod.estimate_residual_full(A, target, rec.x_hat, d, m)
        sketched[r] = est_mod.estimate_residual_sketched(SA, St, rec.x_hat, d, m)
    return float(full.mean()), float(sketched.mean())


def verify_gram_identity(family: str, n: int, m: int, reps: int, seed: int) -> float:
    """Max-norm deviation of the seed-averaged S^T S from the identity.

    For the weighted sampling families an auxiliary data matrix is
    generated internally (n x ceil(3n/4), standard normal) as the weight
    source; the Gram identity holds for any valid weights.
    """
    aux = None
    if family in ("rownorm", "leverage"):
        rng = np.random.default_rng(derive_seed(seed, "gram-aux"))
        aux = rng.standard_normal((n, max(2, (3 * n) // 4)))
    acc = np.zeros((n, n))
    for r in range(reps):
        op = make_operator(SketchSpec(family, m, derive_seed(seed, family, m, r)), n, aux=aux)
        S = as_matrix(op)
        acc += S.T @ S
    mean = acc / reps
    return float(np.max(np.abs(mean - np.eye(n))))
