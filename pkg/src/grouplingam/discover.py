"""Estimation strategies: joint multi-group discovery, per-group separate
estimation, and the pooled (naive) baseline.

The joint algorithm repeatedly finds the variable whose residuals are most
independent of it across all groups (weighted sum of per-group scores),
appends it to the ordering, and deflates every group by it; connection
strengths are then fitted by least squares on the original data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kgv, model, regress
from .errors import DegenerateRegressorError, InvalidInputError
from .kgv import KgvParams
from .model import CausalOrdering, GroupDataset, MultiGroupData

VAR_EPS = 1e-12


@dataclass(frozen=True)
class GroupWeights:
    """Nonnegative per-group weights; defaults to the group sample sizes."""

    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(w) for w in self.values)
        if not values:
            raise InvalidInputError("need at least one weight")
        if any(w < 0 for w in values):
            raise InvalidInputError("weights must be nonnegative")
        if all(w == 0 for w in values):
            raise InvalidInputError("at least one weight must be positive")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_sample_sizes(cls, groups: MultiGroupData) -> "GroupWeights":
        return cls(tuple(float(n) for n in groups.sample_sizes))

    @classmethod
    def uniform(cls, n_groups: int) -> "GroupWeights":
        return cls((1.0,) * n_groups)


@dataclass(frozen=True)
class EstimationResult:
    """Outcome of one estimation run.

    ``step_scores`` records, for every appended subscript, the candidate
    score map of that round; the appended subscript is always its argmin.
    The round that force-appends the final variable (q = p) is recorded as a
    single-entry map with score 0.  ``b_matrices`` hold the fitted q-block
    (strictly lower coefficients, zeros elsewhere in the block) embedded in a
    p x p frame with NaN outside the block.
    """

    ordering: CausalOrdering
    b_matrices: tuple[np.ndarray, ...]
    step_scores: tuple[dict[int, float], ...]
    diagnostics: tuple[str, ...] = ()
    early_stopped: bool = False


def _resolve(groups, weights, params):
    if not isinstance(groups, MultiGroupData):
        groups = MultiGroupData(tuple(groups))
    if weights is None:
        weights = GroupWeights.from_sample_sizes(groups)
    if len(weights.values) != groups.n_groups:
        raise InvalidInputError("one weight per group required")
    if params is None:
        params = KgvParams()
    return groups, weights, params


def joint_score(
    groups: MultiGroupData,
    pivot: int,
    weights: GroupWeights | None = None,
    params: KgvParams | None = None,
    subscripts: Sequence[int] | None = None,
) -> float:
    """Weighted sum over groups of the per-group exogeneity statistic."""
    groups, weights, params = _resolve(groups, weights, params)
    if subscripts is None:
        subscripts = tuple(range(groups.n_variables))
    total = 0.0
    for g, w in zip(groups.groups, weights.values):
        data = model.center(g).data
        total += w * kgv.t_kernel(data, subscripts, pivot, params)
    return total


def estimate_joint(
    groups: MultiGroupData,
    q: int | None = None,
    weights: GroupWeights | None = None,
    params: KgvParams | None = None,
) -> EstimationResult:
    """Jointly estimate a shared causal ordering and per-group connection
    strengths.

    Estimates min(q, p-1) positions by repeated scoring and deflation, appends
    the last remaining variable when q = p, then fits each group's strictly
    lower triangular coefficient block by OLS on the original centered data.
    Stops early (with a diagnostic, not an error) if any remaining row becomes
    numerically constant, so residual covariances never go singular.
    """
    groups, weights, params = _resolve(groups, weights, params)
    p = groups.n_variables
    if q is None:
        q = p
    if not 1 <= q <= p:
        raise InvalidInputError(f"q must lie in 1..{p}, got {q}")

    centered = [model.center(g).data for g in groups.groups]
    working = [d.copy() for d in centered]
    subs = tuple(range(p))
    order: list[int] = []
    step_scores: list[dict[int, float]] = []
    diagnostics: list[str] = []
    early_stopped = False

    for _ in range(min(q, p - 1)):
        degenerate = _degenerate_row(working, subs)
        if degenerate is not None:
            s, g = degenerate
            diagnostics.append(
                f"stopped early after {len(order)} positions: variable {s} in"
                f" group {g} has (numerically) zero variance"
            )
            early_stopped = True
            break

        scores: dict[int, float] = {}
        residual_cache: dict[int, list[regress.ResidualMatrix]] = {}
        for j in subs:
            per_group = [regress.deflate(w, subs, j) for w in working]
            residual_cache[j] = per_group
            score = 0.0
            for g_idx, (w, r) in enumerate(zip(weights.values, per_group)):
                score += w * kgv.t_kernel(
                    working[g_idx], subs, j, params,
                    diagnostics=diagnostics, residuals=r,
                )
            scores[j] = score

        m = min(subs, key=lambda j: (scores[j], j))
        order.append(m)
        step_scores.append(scores)
        working = [r.data for r in residual_cache[m]]
        subs = residual_cache[m][0].subscripts

    if not early_stopped and q == p and len(order) == p - 1:
        last = subs[0]
        order.append(last)
        step_scores.append({last: 0.0})

    ordering = CausalOrdering(tuple(order), p)
    b_matrices = tuple(
        regress.fit_lower_triangular(d, ordering) for d in centered
    )
    return EstimationResult(
        ordering=ordering,
        b_matrices=b_matrices,
        step_scores=tuple(step_scores),
        diagnostics=tuple(diagnostics),
        early_stopped=early_stopped,
    )


def _degenerate_row(working, subs):
    for g, rows in enumerate(working):
        variances = rows.var(axis=1)
        for i, s in enumerate(subs):
            if variances[i] < VAR_EPS:
                return s, g
    return None


def estimate_separate(
    groups: MultiGroupData,
    q: int | None = None,
    params: KgvParams | None = None,
) -> list[EstimationResult]:
    """Estimate each group on its own; one group's failure is isolated."""
    if not isinstance(groups, MultiGroupData):
        groups = MultiGroupData(tuple(groups))
    results = []
    for g in groups.groups:
        single = MultiGroupData((g,))
        try:
            results.append(estimate_joint(single, q=q, params=params))
        except Exception as exc:  # noqa: BLE001 - isolate per-group failures
            results.append(
                EstimationResult(
                    ordering=CausalOrdering((), g.n_variables),
                    b_matrices=(np.full((g.n_variables,) * 2, np.nan),),
                    step_scores=(),
                    diagnostics=(f"group {g.group_index} failed: {exc}",),
                    early_stopped=True,
                )
            )
    return results


def estimate_naive(
    groups: MultiGroupData,
    q: int | None = None,
    params: KgvParams | None = None,
    center_per_group: bool = False,
) -> EstimationResult:
    """Concatenate all groups into one dataset and estimate it as one group.

    By default the pooled data is centered globally, modelling what naive
    pooling actually does; ``center_per_group`` removes each group's mean
    before concatenation instead.
    """
    if not isinstance(groups, MultiGroupData):
        groups = MultiGroupData(tuple(groups))
    parts = groups.groups
    if center_per_group:
        parts = tuple(model.center(g) for g in parts)
    pooled = np.concatenate([g.data for g in parts], axis=1)
    dataset = GroupDataset(pooled, group_index=0)
    return estimate_joint(MultiGroupData((dataset,)), q=q, params=params)
