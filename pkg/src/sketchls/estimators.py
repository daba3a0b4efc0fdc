"""Sketch-and-solve estimators and the shrinkage family built on them.

The classical estimator solves the compressed problem directly and is
unbiased.  The shrinkage variants rescale it toward the origin by a
data-dependent factor, trading a small bias for lower variance; they
differ only in how the residual energy entering the factor is obtained:

* ``js_oracle``      uses the true residual energy (not observable in practice),
* ``shrinkage``      estimates it from the full data as (m-d-1)/(m-1) * ||A x_hat - y||^2,
* ``shrinkage_alt``  estimates it from sketched data only as m/(m-d) * ||SA x_hat - Sy||^2,
* ``positive_part``  clamps the shrinkage factor at zero,
* ``shrinkage_matrix`` is the Frobenius-norm variant for matrix targets.

All variants leave the input unchanged (flagged) when d <= 2, where
shrinking cannot help.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RANK_TOL
from .errors import (
    DimensionMismatchError,
    InvalidSketchSizeError,
    RankDeficientSketchError,
)

KINDS = (
    "classical",
    "js-oracle",
    "shrinkage",
    "shrinkage-alt",
    "positive-part",
    "shrinkage-fro",
)


@dataclass(frozen=True)
class EstimateRecord:
    """An estimator output plus the shrinkage bookkeeping around it.

    `shrink_factor` is 1.0 for the classical estimator and at most 1.0
    for every variant (it may be negative except for positive-part).
    `r2_estimate` is the residual-energy estimate that entered the
    factor; absent for classical and for the oracle fed the true value.
    `degenerate` flags the fallback paths (d <= 2 or a vanishing
    sketched direction) where the input is returned unchanged.
    `snr_estimate` is the diagnostic ratio ||SA x_hat||^2 / ||A x_hat - y||^2.
    """

    x_hat: np.ndarray
    kind: str
    shrink_factor: float = 1.0
    r2_estimate: float | None = None
    degenerate: bool = False
    snr_estimate: float | None = None

    def __post_init__(self):
        arr = np.asarray(self.x_hat, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "x_hat", arr)


def _sq(a) -> float:
    a = np.asarray(a, dtype=np.float64)
    return float(np.sum(a * a))


def classical(SA, Sy, rank_tol: float = RANK_TOL) -> EstimateRecord:
    """Solve the compressed problem min ||SA x - Sy||^2 by orthogonal factorization."""
    SA = np.asarray(SA, dtype=np.float64)
    Sy = np.asarray(Sy, dtype=np.float64)
    if SA.ndim != 2 or Sy.shape[0] != SA.shape[0]:
        raise DimensionMismatchError(f"incompatible shapes SA={SA.shape}, Sy={Sy.shape}")
    m, d = SA.shape
    if m < d:
        raise RankDeficientSketchError(f"sketch size m={m} below column count d={d}")
    x, _, _, svals = np.linalg.lstsq(SA, Sy, rcond=None)
    if svals[-1] <= rank_tol * svals[0]:
        raise RankDeficientSketchError(
            f"SA is rank deficient: s_min/s_max = {svals[-1] / svals[0]:.3e}"
        )
    return EstimateRecord(x_hat=x, kind="classical", shrink_factor=1.0)


def estimate_residual_full(A, y, x_hat, d: int, m: int) -> float:
    """Unbiased residual-energy estimate from the full data.

    Returns (m-d-1)/(m-1) * ||A x_hat - y||^2; requires m > d + 1.
    """
    if m <= d + 1:
        raise InvalidSketchSizeError(f"residual estimate needs m > d+1, got m={m}, d={d}")
    return (m - d - 1) / (m - 1) * _sq(np.asarray(A) @ np.asarray(x_hat) - np.asarray(y))


def estimate_residual_sketched(SA, Sy, x_hat, d: int, m: int) -> float:
    """Unbiased residual-energy estimate from sketched data only.

    Returns m/(m-d) * ||SA x_hat - Sy||^2; requires m > d.  Useful when
    the original (A, y) cannot be observed.
    """
    if m <= d:
        raise InvalidSketchSizeError(f"sketched residual estimate needs m > d, got m={m}, d={d}")
    return m / (m - d) * _sq(np.asarray(SA) @ np.asarray(x_hat) - np.asarray(Sy))


def _shrink(x_hat, SA, r2_value: float, d: int, m: int, kind: str,
            r2_estimate: float | None, snr_estimate: float | None) -> EstimateRecord:
    """Common James-Stein style rescaling: factor = 1 - (d-2) r2 / (m ||SA x_hat||^2)."""
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if d <= 2:
        return EstimateRecord(x_hat=x_hat, kind=kind, shrink_factor=1.0,
                              r2_estimate=r2_estimate, degenerate=True)
    energy = _sq(np.asarray(SA) @ x_hat)
    if energy == 0.0:
        return EstimateRecord(x_hat=x_hat, kind=kind, shrink_factor=1.0,
                              r2_estimate=r2_estimate, degenerate=True)
    factor = 1.0 - (d - 2) * r2_value / (m * energy)
    return EstimateRecord(x_hat=factor * x_hat, kind=kind, shrink_factor=factor,
                          r2_estimate=r2_estimate, snr_estimate=snr_estimate)


def js_oracle(x_hat, SA, r2_true: float, d: int, m: int) -> EstimateRecord:
    """Shrink with the true residual energy (oracle reference)."""
    return _shrink(x_hat, SA, r2_true, d, m, "js-oracle", None, None)


def shrinkage(x_hat, SA, A, y, d: int, m: int, residual_sq: float | None = None) -> EstimateRecord:
    """Practical shrinkage estimator with the full-data residual estimate.

    factor = 1 - (d-2)(m-d-1) ||A x_hat - y||^2 / (m (m-1) ||SA x_hat||^2).
    The factor is not clamped and may go negative.  `residual_sq`
    overrides ||A x_hat - y||^2, e.g. with a value computed from an
    independent second sketch.
    """
    if m <= d + 1:
        raise InvalidSketchSizeError(f"shrinkage needs m > d+1, got m={m}, d={d}")
    if residual_sq is None:
        residual_sq = _sq(np.asarray(A) @ np.asarray(x_hat) - np.asarray(y))
    r2_est = (m - d - 1) / (m - 1) * residual_sq
    energy = _sq(np.asarray(SA) @ np.asarray(x_hat))
    proxy = energy / residual_sq if residual_sq > 0 else math.inf
    return _shrink(x_hat, SA, r2_est, d, m, "shrinkage", r2_est, proxy)


def shrinkage_alt(x_hat, SA, Sy, d: int, m: int, residual_sq: float | None = None) -> EstimateRecord:
    """Shrinkage variant that sees only the sketched data.

    factor = 1 - (d-2) ||SA x_hat - Sy||^2 / ((m-d) ||SA x_hat||^2).
    `residual_sq` overrides ||SA x_hat - Sy||^2.
    """
    if m <= d:
        raise InvalidSketchSizeError(f"shrinkage-alt needs m > d, got m={m}, d={d}")
    if residual_sq is None:
        residual_sq = _sq(np.asarray(SA) @ np.asarray(x_hat) - np.asarray(Sy))
    r2_est = m / (m - d) * residual_sq
    return _shrink(x_hat, SA, r2_est, d, m, "shrinkage-alt", r2_est, None)


def positive_part(x_hat, SA, A, y, d: int, m: int, residual_sq: float | None = None) -> EstimateRecord:
    """Shrinkage with the factor clamped at zero (never flips sign)."""
    rec = shrinkage(x_hat, SA, A, y, d, m, residual_sq=residual_sq)
    if rec.shrink_factor >= 0.0:
        return EstimateRecord(x_hat=rec.x_hat, kind="positive-part",
                              shrink_factor=rec.shrink_factor, r2_estimate=rec.r2_estimate,
                              degenerate=rec.degenerate, snr_estimate=rec.snr_estimate)
    zero = np.zeros_like(np.asarray(x_hat, dtype=np.float64))
    return EstimateRecord(x_hat=zero, kind="positive-part", shrink_factor=0.0,
                          r2_estimate=rec.r2_estimate, snr_estimate=rec.snr_estimate)


def shrinkage_matrix(X_hat, SA, A, Y, d: int, m: int, residual_sq: float | None = None) -> EstimateRecord:
    """Frobenius-norm shrinkage for matrix regression targets.

    Same factor as `shrinkage` with vector norms replaced by Frobenius
    norms; with a single target column it reduces exactly to the vector
    estimator.
    """
    if m <= d + 1:
        raise InvalidSketchSizeError(f"shrinkage-fro needs m > d+1, got m={m}, d={d}")
    if residual_sq is None:
        residual_sq = _sq(np.asarray(A) @ np.asarray(X_hat) - np.asarray(Y))
    r2_est = (m - d - 1) / (m - 1) * residual_sq
    proxy_energy = _sq(np.asarray(SA) @ np.asarray(X_hat))
    proxy = proxy_energy / residual_sq if residual_sq > 0 else math.inf
    return _shrink(X_hat, SA, r2_est, d, m, "shrinkage-fro", r2_est, proxy)
