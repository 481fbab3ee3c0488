"""Least-squares building blocks: simple-regression residuals, deflation and
final connection-strength fitting.

Covariances use the 1/n normalization throughout; the regression slope
cov/var is normalization-invariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CollinearityError, DegenerateRegressorError, InvalidInputError
from .model import CausalOrdering

VAR_EPS = 1e-12


@dataclass(frozen=True)
class ResidualMatrix:
    """Rows of residuals after deflation, with the surviving variable subscripts."""

    data: np.ndarray
    subscripts: tuple[int, ...]

    def __post_init__(self):
        if self.data.shape[0] != len(self.subscripts):
            raise InvalidInputError("one subscript per residual row required")
        object.__setattr__(self, "subscripts", tuple(self.subscripts))

    def row(self, subscript: int) -> np.ndarray:
        return self.data[self.subscripts.index(subscript)]


def simple_residual(target: np.ndarray, regressor: np.ndarray) -> np.ndarray:
    """Residual of ``target`` regressed on ``regressor`` (both centered rows).

    Returns target - (cov(target, regressor) / var(regressor)) * regressor.
    """
    target = np.asarray(target, dtype=float)
    regressor = np.asarray(regressor, dtype=float)
    if target.shape != regressor.shape or target.ndim != 1:
        raise InvalidInputError("rows must be 1-D and of equal length")
    n = target.shape[0]
    if n < 2:
        raise InvalidInputError("need at least two samples")
    var = float(regressor @ regressor) / n
    if var < VAR_EPS:
        raise DegenerateRegressorError("regressor has (numerically) zero variance")
    cov = float(target @ regressor) / n
    return target - (cov / var) * regressor


def deflate(
    rows: np.ndarray, subscripts: Sequence[int], pivot: int
) -> ResidualMatrix:
    """Regress the pivot row out of every other row and drop the pivot.

    ``rows`` holds the current (possibly already deflated) variable rows in the
    order given by ``subscripts``; ``pivot`` is an original variable subscript.
    """
    subscripts = tuple(subscripts)
    if pivot not in subscripts:
        raise InvalidInputError(f"pivot {pivot} not among current subscripts")
    rows = np.asarray(rows, dtype=float)
    pivot_row = rows[subscripts.index(pivot)]
    kept = tuple(s for s in subscripts if s != pivot)
    residuals = np.empty((len(kept), rows.shape[1]))
    for out_i, s in enumerate(kept):
        residuals[out_i] = simple_residual(rows[subscripts.index(s)], pivot_row)
    return ResidualMatrix(residuals, kept)


def fit_lower_triangular(data: np.ndarray, ordering: CausalOrdering) -> np.ndarray:
    """Estimate connection strengths for the ordered block by OLS on the
    original (centered, non-deflated) data.

    For each position t >= 1 in the ordering, the variable at t is regressed
    on all its predecessors jointly.  Returns a p x p matrix: fitted
    coefficients in the strictly-lower block positions, exact zeros on the
    block's diagonal and upper positions, NaN everywhere outside the block.
    """
    data = np.asarray(data, dtype=float)
    p, n = data.shape
    order = ordering.order
    q = len(order)
    if ordering.n_variables != p:
        raise InvalidInputError("ordering and data sizes differ")
    if n <= q:
        raise InvalidInputError(f"need more than q={q} samples, got {n}")

    b = np.full((p, p), np.nan)
    block = np.asarray(order, dtype=int)
    b[np.ix_(block, block)] = 0.0
    for t in range(1, q):
        preds = data[list(order[:t])]
        y = data[order[t]]
        gram = preds @ preds.T
        try:
            lower = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError:
            raise CollinearityError(
                f"predecessors of ordering position {t} are collinear"
            ) from None
        beta = np.linalg.solve(lower.T, np.linalg.solve(lower, preds @ y))
        b[order[t], list(order[:t])] = beta
    return b
