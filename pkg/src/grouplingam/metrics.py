"""Scoring of estimation results against ground truth, and benchmark
aggregation.

A "dataset" is one group; a joint or pooled run contributes one shared
ordering that is scored against every group's truth separately, so a trial
with c groups always accounts for c datasets regardless of method.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .model import (
    CausalOrdering,
    ConnectionMatrix,
    is_consistent_with_ordering,
    is_prefix_consistent,
)
from .simgen import GroundTruth

METHODS = ("joint", "separate", "naive")


def order_success(
    estimated: CausalOrdering,
    true_b: ConnectionMatrix,
    q: int,
    mode: str = "support",
    true_ordering: CausalOrdering | None = None,
) -> bool:
    """Whether an estimated (partial) ordering is correct for one dataset.

    mode="support" (default) accepts any ordering consistent with the true
    zero pattern: full orderings via the permutation check, partial ones via
    prefix consistency.  mode="exact" demands the generating permutation's
    first q entries.  An early-stopped estimate shorter than min(q, p-1)
    counts as a failure.
    """
    p = true_b.n_variables
    if estimated.n_variables != p:
        raise InvalidInputError("ordering and truth sizes differ")
    if estimated.q < min(q, p - 1):
        return False
    if mode == "exact":
        if true_ordering is None:
            raise InvalidInputError("exact mode needs the generating ordering")
        return estimated.order[:q] == true_ordering.order[:q]
    if mode != "support":
        raise InvalidInputError(f"unknown success mode {mode!r}")
    if estimated.q == p:
        return is_consistent_with_ordering(true_b, estimated)
    return is_prefix_consistent(true_b, estimated)


def squared_error(
    estimated_b: np.ndarray,
    true_b: ConnectionMatrix,
    ordering: CausalOrdering,
    q: int | None = None,
) -> float:
    """Mean squared coefficient error over the estimated q-block.

    Both matrices are compared in the coordinates induced by the estimated
    ordering: estimated coefficients sit strictly below the diagonal, so a
    true edge oriented against the estimated ordering contributes its full
    squared strength (vs the structural zero above the diagonal) on top of
    the error at the mirrored position.  Averaged over q(q-1)/2 pairs.
    """
    if q is None:
        q = ordering.q
    order = ordering.order[:q]
    if len(order) < q:
        raise InvalidInputError("ordering shorter than the requested block")
    pairs = q * (q - 1) // 2
    if pairs == 0:
        return 0.0
    total = 0.0
    for t in range(q):
        for s in range(t):
            lower = estimated_b[order[t], order[s]]
            total += (lower - true_b.entries[order[t], order[s]]) ** 2
            total += true_b.entries[order[s], order[t]] ** 2
    return total / pairs


@dataclass(frozen=True)
class TrialRecord:
    """Per-trial scoring: one success flag and squared error per dataset and
    method, plus early-stop bookkeeping."""

    trial: int
    successes: dict[str, tuple[bool, ...]]
    squared_errors: dict[str, tuple[float, ...]]
    early_stops: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class BenchmarkReport:
    """Aggregated benchmark results for the three methods."""

    success_pct: dict[str, float]
    avg_squared_error: dict[str, float]
    n_trials: int
    n_datasets: int
    early_stops: dict[str, int]
    records: tuple[TrialRecord, ...]


def score_trial(
    trial: int,
    truth: GroundTruth,
    joint_result,
    separate_results,
    naive_result,
    q: int,
    mode: str = "support",
) -> TrialRecord:
    """Score all three methods of one trial against the trial's ground truth."""
    c = len(truth.b_matrices)
    successes: dict[str, tuple[bool, ...]] = {}
    errors: dict[str, tuple[float, ...]] = {}
    early: dict[str, int] = {}

    shared = {"joint": joint_result, "naive": naive_result}
    for name, result in shared.items():
        flags, errs = [], []
        for g in range(c):
            flags.append(
                order_success(
                    result.ordering, truth.b_matrices[g], q,
                    mode=mode, true_ordering=truth.ordering,
                )
            )
            b_est = result.b_matrices[0] if name == "naive" else result.b_matrices[g]
            errs.append(_block_error(b_est, truth.b_matrices[g], result.ordering, q))
        successes[name] = tuple(flags)
        errors[name] = tuple(errs)
        early[name] = int(result.early_stopped)

    flags, errs, stops = [], [], 0
    for g, result in enumerate(separate_results):
        stops += int(result.early_stopped)
        flags.append(
            order_success(
                result.ordering, truth.b_matrices[g], q,
                mode=mode, true_ordering=truth.ordering,
            )
        )
        errs.append(_block_error(result.b_matrices[0], truth.b_matrices[g],
                                 result.ordering, q))
    successes["separate"] = tuple(flags)
    errors["separate"] = tuple(errs)
    early["separate"] = stops

    return TrialRecord(trial=trial, successes=successes,
                       squared_errors=errors, early_stops=early)


def _block_error(b_est, true_b, ordering, q):
    if ordering.q < q:
        return float("nan")  # early stop; excluded from the average
    return squared_error(b_est, true_b, ordering, q)


def summarize(records: list[TrialRecord]) -> BenchmarkReport:
    """Aggregate trial records into success percentages and error averages."""
    if not records:
        raise InvalidInputError("need at least one trial record")
    records = tuple(sorted(records, key=lambda r: r.trial))
    n_datasets = sum(len(r.successes["joint"]) for r in records)
    success_pct = {}
    avg_err = {}
    early = {}
    for m in METHODS:
        wins = sum(sum(r.successes[m]) for r in records)
        success_pct[m] = 100.0 * wins / n_datasets
        errs = np.array([e for r in records for e in r.squared_errors[m]])
        errs = errs[np.isfinite(errs)]
        avg_err[m] = float(errs.mean()) if errs.size else float("nan")
        early[m] = sum(r.early_stops.get(m, 0) for r in records)
    return BenchmarkReport(
        success_pct=success_pct,
        avg_squared_error=avg_err,
        n_trials=len(records),
        n_datasets=n_datasets,
        early_stops=early,
        records=records,
    )
