"""Domain types for multi-group linear non-Gaussian acyclic models.

Data matrices are stored with variables in rows and samples in columns
(p x n).  Variable subscripts are 0-based everywhere inside the package;
the CLI maps them to 1-based names taken from file headers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import AcyclicityError, InvalidInputError

CENTERING_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = a.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class GroupDataset:
    """One group's observation matrix, p variables x n samples."""

    data: np.ndarray
    group_index: int = 0
    centered: bool = False

    def __post_init__(self):
        data = _readonly(self.data)
        if data.ndim != 2:
            raise InvalidInputError("data must be a 2-D (p x n) matrix")
        p, n = data.shape
        if p < 1:
            raise InvalidInputError("need at least one variable")
        if n < 2:
            raise InvalidInputError("need at least two samples per group")
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("data contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def n_variables(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class MultiGroupData:
    """A collection of groups sharing the same variable set."""

    groups: tuple[GroupDataset, ...]

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise InvalidInputError("need at least one group")
        p = groups[0].n_variables
        if any(g.n_variables != p for g in groups):
            raise InvalidInputError("all groups must share the same number of variables")
        object.__setattr__(self, "groups", groups)

    @property
    def n_variables(self) -> int:
        return self.groups[0].n_variables

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def sample_sizes(self) -> tuple[int, ...]:
        return tuple(g.n_samples for g in self.groups)


@dataclass(frozen=True)
class ConnectionMatrix:
    """Direct-effect matrix B; entry (i, j) is the effect of variable j on i."""

    entries: np.ndarray

    def __post_init__(self):
        entries = _readonly(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvalidInputError("connection matrix must be square")
        if np.any(np.diag(entries) != 0.0):
            raise InvalidInputError("connection matrix diagonal must be exactly zero")
        object.__setattr__(self, "entries", entries)

    @property
    def n_variables(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class CausalOrdering:
    """An ordered list of variable subscripts; may be a prefix (q <= p)."""

    order: tuple[int, ...]
    n_variables: int

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        p = self.n_variables
        if p < 1:
            raise InvalidInputError("n_variables must be positive")
        if len(set(order)) != len(order):
            raise InvalidInputError("ordering contains duplicate subscripts")
        if any(i < 0 or i >= p for i in order):
            raise InvalidInputError("ordering subscript out of range")
        if len(order) > p:
            raise InvalidInputError("ordering longer than the variable set")
        object.__setattr__(self, "order", order)

    @property
    def q(self) -> int:
        return len(self.order)

    @property
    def is_full(self) -> bool:
        return self.q == self.n_variables


@dataclass(frozen=True)
class TotalEffectMatrix:
    """Total-effect matrix A = (I - B)^-1 for the B it was computed from."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _readonly(self.entries))


@dataclass(frozen=True)
class ExternalInfluenceSpec:
    """Generative description of the external influences, per (group, variable)."""

    distribution_ids: tuple[tuple[str, ...], ...]  # [group][variable]
    variances: np.ndarray  # c x p

    def __post_init__(self):
        variances = _readonly(self.variances)
        if np.any(variances <= 0):
            raise InvalidInputError("influence variances must be positive")
        ids = tuple(tuple(row) for row in self.distribution_ids)
        if len(ids) != variances.shape[0] or any(
            len(row) != variances.shape[1] for row in ids
        ):
            raise InvalidInputError("distribution ids and variances disagree in shape")
        object.__setattr__(self, "distribution_ids", ids)
        object.__setattr__(self, "variances", variances)


def center(dataset: GroupDataset) -> GroupDataset:
    """Remove the mean of each variable row.  Idempotent; variances unchanged."""
    data = dataset.data - dataset.data.mean(axis=1, keepdims=True)
    return replace(dataset, data=data, centered=True)


def find_causal_ordering(b: ConnectionMatrix) -> CausalOrdering:
    """Return an ordering certifying acyclicity via greedy zero-row elimination.

    At each step picks the smallest-subscript remaining variable whose row has
    no nonzero entry on the remaining columns (i.e. no remaining parent).
    Raises AcyclicityError if none exists.
    """
    p = b.n_variables
    support = b.entries != 0.0
    remaining = list(range(p))
    order = []
    while remaining:
        for i in remaining:
            if not any(support[i, j] for j in remaining if j != i):
                order.append(i)
                remaining.remove(i)
                break
        else:
            raise AcyclicityError(
                f"no exogenous variable among remaining subscripts {remaining}"
            )
    return CausalOrdering(tuple(order), p)


def total_effects(b: ConnectionMatrix) -> TotalEffectMatrix:
    """Total effects A = (I - B)^-1; requires B acyclic."""
    find_causal_ordering(b)  # raises on cycles
    p = b.n_variables
    a = np.linalg.solve(np.eye(p) - b.entries, np.eye(p))
    return TotalEffectMatrix(a)


def is_consistent_with_ordering(b: ConnectionMatrix, k: CausalOrdering) -> bool:
    """True iff permuting B by the full ordering k is strictly lower triangular."""
    if not k.is_full:
        raise InvalidInputError(
            "consistency check needs a full ordering; use is_prefix_consistent"
        )
    if k.n_variables != b.n_variables:
        raise InvalidInputError("ordering and matrix sizes differ")
    perm = np.asarray(k.order)
    permuted = b.entries[np.ix_(perm, perm)]
    return not np.any(np.triu(permuted) != 0.0)


def is_prefix_consistent(b: ConnectionMatrix, k: CausalOrdering) -> bool:
    """True iff k extends to a full ordering consistent with B.

    Walking k in order, each named variable must have no nonzero incoming
    entry from a variable not named earlier.
    """
    if k.q < 1:
        raise InvalidInputError("prefix must name at least one variable")
    if k.n_variables != b.n_variables:
        raise InvalidInputError("ordering and matrix sizes differ")
    named: set[int] = set()
    for i in k.order:
        row = b.entries[i]
        for j in range(b.n_variables):
            if j != i and j not in named and row[j] != 0.0:
                return False
        named.add(i)
    return True
