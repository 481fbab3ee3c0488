"""Synthetic multi-group benchmark generator.

A strictly lower triangular support is drawn Bernoulli(s) per entry (one
draw shared by all groups by default, so the groups agree on which direct
effects exist while disagreeing on their strengths), nonzero coefficients
get a random magnitude and sign per group, external influences are drawn
from a catalog of non-Gaussian distributions (each analytically normalized
to zero mean / unit variance, then scaled to a random target variance),
observations follow by forward substitution, random Gaussian means are
added, and finally one variable permutation shared by all groups is applied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import InvalidInputError
from .model import (
    CausalOrdering,
    ConnectionMatrix,
    ExternalInfluenceSpec,
    GroupDataset,
    MultiGroupData,
)


def load_catalog() -> dict[str, dict]:
    """Catalog of external-influence distributions, keyed by id.

    Shipped as editable configuration data inside the package.
    """
    return dict(_catalog_cached())


@lru_cache(maxsize=1)
def _catalog_cached():
    raw = resources.files("grouplingam.data").joinpath("influence_catalog.json")
    entries = json.loads(raw.read_text())["entries"]
    return {e["id"]: e for e in entries}


def catalog_moments(entry: dict) -> tuple[float, float]:
    """Analytic (mean, variance) of a raw catalog entry."""
    kind = entry["kind"]
    if kind == "student_t":
        dof = entry["dof"]
        return 0.0, dof / (dof - 2.0)
    if kind == "laplace":
        return 0.0, 2.0 * entry["scale"] ** 2
    if kind == "uniform":
        return 0.0, entry["half_width"] ** 2 / 3.0
    if kind == "exponential":
        return entry["scale"], entry["scale"] ** 2
    if kind in ("gauss_mixture", "laplace_mixture"):
        w = np.asarray(entry["weights"])
        locs = np.asarray(entry["locs"])
        scales = np.asarray(entry["scales"])
        comp_var = scales**2 if kind == "gauss_mixture" else 2.0 * scales**2
        mean = float(w @ locs)
        var = float(w @ (comp_var + locs**2) - mean**2)
        return mean, var
    raise InvalidInputError(f"unknown catalog kind {kind!r}")


def sample_catalog_entry(entry: dict, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n iid samples, normalized to zero mean and unit variance."""
    kind = entry["kind"]
    if kind == "student_t":
        raw = rng.standard_t(entry["dof"], size=n)
    elif kind == "laplace":
        raw = rng.laplace(0.0, entry["scale"], size=n)
    elif kind == "uniform":
        raw = rng.uniform(-entry["half_width"], entry["half_width"], size=n)
    elif kind == "exponential":
        raw = rng.exponential(entry["scale"], size=n)
    elif kind in ("gauss_mixture", "laplace_mixture"):
        w = np.asarray(entry["weights"])
        locs = np.asarray(entry["locs"])
        scales = np.asarray(entry["scales"])
        comp = rng.choice(len(w), size=n, p=w)
        if kind == "gauss_mixture":
            raw = locs[comp] + scales[comp] * rng.standard_normal(n)
        else:
            raw = locs[comp] + rng.laplace(0.0, 1.0, size=n) * scales[comp]
    else:
        raise InvalidInputError(f"unknown catalog kind {kind!r}")
    mean, var = catalog_moments(entry)
    return (raw - mean) / np.sqrt(var)


def default_sparsity(p: int) -> float:
    """Edge probability making the expected number of edges equal p/2."""
    if p < 2:
        raise InvalidInputError("need at least two variables")
    return 1.0 / (p - 1)


@dataclass(frozen=True)
class SimSpec:
    """Configuration of one synthetic multi-group dataset."""

    p: int
    c: int
    sample_sizes: tuple[int, ...]
    sparsity: float | None = None  # None -> default_sparsity(p)
    coef_range: tuple[float, float] = (0.5, 1.5)
    variance_range: tuple[float, float] = (1.0, 3.0)
    mean_variance: float = 4.0
    distributions: tuple[str, ...] | None = None  # None -> full catalog
    share_support: bool = True  # one zero pattern per dataset, reused by groups
    share_distributions: bool = False  # one draw per variable, reused by groups
    seed: int | None = None

    def __post_init__(self):
        if self.p < 2:
            raise InvalidInputError("p must be at least 2")
        if self.c < 1:
            raise InvalidInputError("c must be at least 1")
        sizes = tuple(int(n) for n in self.sample_sizes)
        if len(sizes) != self.c or any(n < 2 for n in sizes):
            raise InvalidInputError("need c sample sizes, each at least 2")
        object.__setattr__(self, "sample_sizes", sizes)
        s = self.resolved_sparsity
        if not 0 < s <= 1:
            raise InvalidInputError("sparsity must lie in (0, 1]")
        lo, hi = self.coef_range
        if not 0 < lo <= hi:
            raise InvalidInputError("coefficient range must be positive and ordered")
        vlo, vhi = self.variance_range
        if not 0 < vlo <= vhi:
            raise InvalidInputError("variance range must be positive and ordered")
        if self.mean_variance < 0:
            raise InvalidInputError("mean variance must be nonnegative")
        names = self.distribution_ids
        catalog = load_catalog()
        unknown = [d for d in names if d not in catalog]
        if unknown:
            raise InvalidInputError(f"unknown distribution ids: {unknown}")
        if self.distributions is not None:
            object.__setattr__(self, "distributions", tuple(self.distributions))

    @property
    def resolved_sparsity(self) -> float:
        return default_sparsity(self.p) if self.sparsity is None else self.sparsity

    @property
    def distribution_ids(self) -> tuple[str, ...]:
        if self.distributions is None:
            return tuple(load_catalog())
        return tuple(self.distributions)


@dataclass(frozen=True)
class GroundTruth:
    """Everything needed to score an estimate of a generated dataset."""

    ordering: CausalOrdering  # shared causal ordering in observed coordinates
    b_matrices: tuple[ConnectionMatrix, ...]  # per group, observed coordinates
    influences: ExternalInfluenceSpec
    means: np.ndarray  # c x p, observed coordinates
    permutation: tuple[int, ...]  # observed index -> generation index


def sample_structure(
    spec: SimSpec, rng: np.random.Generator
) -> list[np.ndarray]:
    """Per-group strictly lower triangular coefficient matrices (generation
    coordinates): Bernoulli(s) support, magnitudes uniform in the coefficient
    range, signs uniform on {-1, +1}.

    With ``share_support`` (the default) the support is drawn once per dataset
    and reused by every group, so the groups share the set of direct effects
    but not their strengths; otherwise each group gets its own support.
    """
    s = spec.resolved_sparsity
    lo, hi = spec.coef_range
    p = spec.p
    rows, cols = np.tril_indices(p, k=-1)
    matrices = []
    present = rng.random(len(rows)) < s
    for g in range(spec.c):
        if g > 0 and not spec.share_support:
            present = rng.random(len(rows)) < s
        magnitudes = rng.uniform(lo, hi, size=len(rows))
        signs = rng.integers(0, 2, size=len(rows)) * 2 - 1
        b = np.zeros((p, p))
        b[rows, cols] = present * signs * magnitudes
        matrices.append(b)
    return matrices


def sample_influences(
    spec: SimSpec, rng: np.random.Generator
) -> tuple[list[np.ndarray], ExternalInfluenceSpec]:
    """External influence samples per group (p x n), plus the generative spec.

    Distribution ids and variances are drawn per (variable, group) unless
    ``share_distributions`` reuses the first group's draws for all groups.
    """
    catalog = load_catalog()
    names = spec.distribution_ids
    vlo, vhi = spec.variance_range

    ids = np.empty((spec.c, spec.p), dtype=object)
    variances = np.empty((spec.c, spec.p))
    for g in range(spec.c):
        if spec.share_distributions and g > 0:
            ids[g] = ids[0]
            variances[g] = variances[0]
            continue
        picks = rng.integers(0, len(names), size=spec.p)
        ids[g] = [names[k] for k in picks]
        variances[g] = rng.uniform(vlo, vhi, size=spec.p)

    samples = []
    for g, n in enumerate(spec.sample_sizes):
        e = np.empty((spec.p, n))
        for i in range(spec.p):
            base = sample_catalog_entry(catalog[ids[g, i]], n, rng)
            e[i] = base * np.sqrt(variances[g, i])
        samples.append(e)
    influence_spec = ExternalInfluenceSpec(
        tuple(tuple(row) for row in ids), variances
    )
    return samples, influence_spec


def generate(
    spec: SimSpec, rng: np.random.Generator | None = None
) -> tuple[MultiGroupData, GroundTruth]:
    """Generate one multi-group dataset with its ground truth.

    Deterministic for a fixed (spec, seed): the same seed reproduces the same
    bytes.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)

    b_gen = sample_structure(spec, rng)
    influences, influence_spec = sample_influences(spec, rng)
    means = rng.normal(0.0, np.sqrt(spec.mean_variance), size=(spec.c, spec.p))
    perm = tuple(int(i) for i in rng.permutation(spec.p))

    groups = []
    b_observed = []
    idx = np.asarray(perm)
    for g, n in enumerate(spec.sample_sizes):
        x = np.empty((spec.p, n))
        for i in range(spec.p):  # forward substitution in generation order
            x[i] = b_gen[g][i, :i] @ x[:i] + influences[g][i]
        x = x + means[g][:, None]
        groups.append(GroupDataset(x[idx], group_index=g))
        b_observed.append(ConnectionMatrix(b_gen[g][np.ix_(idx, idx)]))

    # Observed position of generation variable o is argsort(perm)[o]; listing
    # those positions in generation order gives the shared causal ordering.
    inverse = np.argsort(idx)
    ordering = CausalOrdering(tuple(int(i) for i in inverse), spec.p)

    # Re-express per-variable bookkeeping in observed coordinates.
    ids_observed = tuple(
        tuple(row[k] for k in perm) for row in influence_spec.distribution_ids
    )
    truth = GroundTruth(
        ordering=ordering,
        b_matrices=tuple(b_observed),
        influences=ExternalInfluenceSpec(
            ids_observed, influence_spec.variances[:, idx]
        ),
        means=means[:, idx],
        permutation=perm,
    )
    return MultiGroupData(tuple(groups)), truth
