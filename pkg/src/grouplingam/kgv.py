"""Kernel-based pairwise independence score (a kernel generalized variance)
and the per-group exogeneity statistic built on it.

The score for a pair (u, v) is -1/2 * sum log(1 - rho_t^2), where rho_t are
regularized kernel canonical correlations of the Gaussian-RBF feature maps of
u and v.  Gram matrices are handled through low-rank factors obtained by
pivoted incomplete Cholesky, so the cost per pair is O(n r^2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import regress
from .errors import DegenerateInputError, InvalidInputError

VAR_EPS = 1e-12
RHO_CLAMP = 1.0 - 1e-12


@dataclass(frozen=True)
class KgvParams:
    """Hyperparameters of the kernel independence score.

    kappa=None selects 2e-2 for n <= 1000 and 2e-3 for larger samples.
    """

    sigma: float = 1.0
    kappa: float | None = None
    eta: float = 1e-5
    max_rank: int = 100

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvalidInputError("sigma must be positive")
        if self.kappa is not None and self.kappa <= 0:
            raise InvalidInputError("kappa must be positive")
        if not 0 < self.eta < 1:
            raise InvalidInputError("eta must lie in (0, 1)")
        if self.max_rank < 1:
            raise InvalidInputError("max_rank must be at least 1")

    def kappa_for(self, n: int) -> float:
        if self.kappa is not None:
            return self.kappa
        return 2e-2 if n <= 1000 else 2e-3


@dataclass(frozen=True)
class LowRankFactor:
    """Factor G with K ~= G G^T for a (full) Gram matrix K."""

    factor: np.ndarray
    pivots: tuple[int, ...]

    @property
    def rank(self) -> int:
        return self.factor.shape[1]


def standardize(row: np.ndarray) -> np.ndarray:
    """Scale a centered row to unit empirical variance (1/n normalization)."""
    row = np.asarray(row, dtype=float)
    var = float(row.var())
    if var < VAR_EPS:
        raise DegenerateInputError("cannot standardize a (numerically) constant row")
    return row / np.sqrt(var)


def incomplete_cholesky(row: np.ndarray, params: KgvParams) -> LowRankFactor:
    """Greedy pivoted Cholesky factor of the Gaussian Gram matrix of ``row``.

    K_uv = exp(-(row_u - row_v)^2 / (2 sigma^2)).  Stops once the residual
    trace drops to eta * n or the rank cap is reached.  The Gram matrix is
    never formed; columns are evaluated on demand.
    """
    row = np.asarray(row, dtype=float)
    n = row.shape[0]
    if n < 2:
        raise InvalidInputError("need at least two samples")
    cap = min(n, params.max_rank)
    inv_two_sigma2 = 1.0 / (2.0 * params.sigma**2)

    diag = np.ones(n)  # residual diagonal; RBF kernel has unit diagonal
    cols = np.empty((n, cap))
    pivots: list[int] = []
    for r in range(cap):
        j = int(np.argmax(diag))
        dj = diag[j]
        if dj <= 0:
            break
        kernel_col = np.exp(-inv_two_sigma2 * (row - row[j]) ** 2)
        if r > 0:
            kernel_col = kernel_col - cols[:, :r] @ cols[j, :r]
        cols[:, r] = kernel_col / np.sqrt(dj)
        diag = diag - cols[:, r] ** 2
        np.maximum(diag, 0.0, out=diag)
        pivots.append(j)
        if diag.sum() <= params.eta * n:
            break
    return LowRankFactor(cols[:, : len(pivots)].copy(), tuple(pivots))


def kgv_from_factors(
    gu: np.ndarray, gv: np.ndarray, n: int, kappa: float
) -> float:
    """Independence score from (uncentered) low-rank Gram factors.

    Centers the factor columns (equivalent to double-centering the Gram
    matrices), forms the regularized cross-correlation operator
    (Gu'Gu + n kappa/2 I)^-1/2 Gu'Gv (Gv'Gv + n kappa/2 I)^-1/2 and returns
    -1/2 sum log(1 - rho_t^2) over its singular values.
    """
    gu = gu - gu.mean(axis=0, keepdims=True)
    gv = gv - gv.mean(axis=0, keepdims=True)
    lam = n * kappa / 2.0
    m = _inv_sqrt(gu.T @ gu + lam * np.eye(gu.shape[1]))
    m = m @ (gu.T @ gv)
    m = m @ _inv_sqrt(gv.T @ gv + lam * np.eye(gv.shape[1]))
    rho = np.linalg.svd(m, compute_uv=False)
    rho = np.clip(rho, 0.0, RHO_CLAMP)
    return float(-0.5 * np.log1p(-(rho**2)).sum())


def _inv_sqrt(sym: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(sym)
    return (vecs / np.sqrt(vals)) @ vecs.T


def kgv_pairwise(u: np.ndarray, v: np.ndarray, params: KgvParams) -> float:
    """Pairwise independence score of two centered rows of equal length.

    Both rows are standardized before kernel evaluation, so the score is
    invariant under rescaling of either argument.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise InvalidInputError("rows must be 1-D and of equal length")
    n = u.shape[0]
    gu = incomplete_cholesky(standardize(u), params).factor
    gv = incomplete_cholesky(standardize(v), params).factor
    return kgv_from_factors(gu, gv, n, params.kappa_for(n))


def t_kernel(
    rows: np.ndarray,
    subscripts: Sequence[int],
    pivot: int,
    params: KgvParams,
    diagnostics: list[str] | None = None,
    residuals: regress.ResidualMatrix | None = None,
) -> float:
    """Exogeneity statistic of a candidate pivot within one group.

    Sums the pairwise score between the pivot row and the residual of every
    other current row regressed on the pivot.  ``residuals`` may carry the
    precomputed deflation of the same (rows, pivot) pair; passing it changes
    nothing but the cost.  A residual with (numerically) zero variance
    contributes 0 and is reported through ``diagnostics``.
    """
    subscripts = tuple(subscripts)
    if len(subscripts) < 2:
        raise InvalidInputError("need at least two current variables")
    if residuals is None:
        residuals = regress.deflate(rows, subscripts, pivot)
    pivot_row = np.asarray(rows, dtype=float)[subscripts.index(pivot)]
    n = pivot_row.shape[0]
    kappa = params.kappa_for(n)
    g_pivot = incomplete_cholesky(standardize(pivot_row), params).factor

    total = 0.0
    for s in residuals.subscripts:
        r = residuals.row(s)
        if float(r.var()) < VAR_EPS:
            if diagnostics is not None:
                diagnostics.append(
                    f"degenerate residual for variable {s} against pivot {pivot};"
                    " its score term was set to 0"
                )
            continue
        g_resid = incomplete_cholesky(standardize(r), params).factor
        total += kgv_from_factors(g_pivot, g_resid, n, kappa)
    return total
