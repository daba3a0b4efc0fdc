"""Synthetic least-squares instances with exactly controlled SNR.

Rows of the data matrix are correlated Gaussians (AR(1)-style covariance
0.5^|i-j| around a constant mean of one).  A solution vector is planted,
normalized so its fitted values have unit norm, and noise is injected
purely inside the null space of A^T so that the residual energy, and
hence the SNR, is exact by construction rather than approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ExactSolution, ProblemInstance, solve_exact
from .errors import DegenerateNoiseError


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape, target SNR, and seed of a synthetic instance.

    k selects matrix regression with k target columns; None means a
    vector target.
    """

    n: int
    d: int
    rho: float
    seed: int
    k: int | None = None

    def __post_init__(self):
        if not self.n > self.d >= 1:
            raise ValueError(f"need n > d >= 1, got n={self.n}, d={self.d}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1 when given")


def ar1_covariance(d: int, decay: float = 0.5) -> np.ndarray:
    """Covariance with geometrically decaying off-diagonals: decay^|i-j|."""
    idx = np.arange(d)
    return decay ** np.abs(idx[:, None] - idx[None, :])


def gen_gaussian_data(spec: SyntheticSpec) -> tuple[ProblemInstance, ExactSolution]:
    """Generate an instance whose exact solution and SNR are planted.

    Row i of A is drawn from N(1, C) with C the AR(1) covariance.  The
    planted solution is an i.i.d. normal draw rescaled so ||A x|| = 1
    (Frobenius for matrix targets).  The target is A x plus null-space
    noise V w scaled by alpha = 1/(sqrt(rho) ||V w||), which makes the
    residual energy exactly 1/rho.  The standard deviation of w cancels
    in that normalization, so w is drawn with unit variance.

    Returns the instance together with the planted solution artifacts.
    """
    rng = np.random.default_rng(spec.seed)
    n, d = spec.n, spec.d
    L = np.linalg.cholesky(ar1_covariance(d))
    A = 1.0 + rng.standard_normal((n, d)) @ L.T

    shape = (d,) if spec.k is None else (d, spec.k)
    x0 = rng.standard_normal(shape)
    x_ls = x0 / np.linalg.norm(A @ x0)

    Q_full, _ = np.linalg.qr(A, mode="complete")
    V = Q_full[:, d:]
    noise_shape = (n - d,) if spec.k is None else (n - d, spec.k)
    for _ in range(2):
        w = rng.standard_normal(noise_shape)
        noise = V @ w
        noise_norm = np.linalg.norm(noise)
        if noise_norm > 0:
            break
    else:
        raise DegenerateNoiseError("null-space noise vanished twice in a row")

    alpha = 1.0 / (math.sqrt(spec.rho) * noise_norm)
    y_perp = alpha * noise
    fitted = A @ x_ls
    target = fitted + y_perp

    if spec.k is None:
        instance = ProblemInstance(A, y=target)
    else:
        instance = ProblemInstance(A, Y=target)
    x_ls.setflags(write=False)
    y_perp.setflags(write=False)
    planted = ExactSolution(
        x_ls=x_ls,
        y_perp=y_perp,
        r2=float(np.sum(y_perp * y_perp)),
        pred_energy=float(np.sum(fitted * fitted)),
    )
    return instance, planted


def add_noise(p: ProblemInstance, kappa: float, seed: int) -> ProblemInstance:
    """Add i.i.d. Gaussian noise of per-coordinate variance kappa * r2 to the target.

    r2 is the residual energy of the unmodified instance.  The noise is
    not confined to the null space of A^T, so the exact solution and the
    residual of the returned instance both change in general; callers
    must re-solve.  kappa = 0 returns an instance with the target
    unchanged.
    """
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    r2 = solve_exact(p).r2
    rng = np.random.default_rng(seed)
    noise = math.sqrt(kappa * r2) * rng.standard_normal(p.target.shape)
    if p.Y is not None:
        return ProblemInstance(p.A, y=p.y, Y=p.Y + noise, rank_tol=p.rank_tol)
    return ProblemInstance(p.A, y=p.y + noise, rank_tol=p.rank_tol)
