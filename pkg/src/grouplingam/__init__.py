"""Joint estimation of multiple linear non-Gaussian acyclic models that
share a causal ordering, with a kernel-based independence score, a synthetic
benchmark generator, and scoring utilities."""

from .discover import (
    EstimationResult,
    GroupWeights,
    estimate_joint,
    estimate_naive,
    estimate_separate,
    joint_score,
)
from .errors import (
    AcyclicityError,
    CollinearityError,
    DegenerateInputError,
    DegenerateRegressorError,
    GroupLingamError,
    InvalidInputError,
)
from .estimator import MultiGroupDirectLiNGAM
from .kgv import KgvParams, kgv_pairwise, t_kernel
from .model import (
    CausalOrdering,
    ConnectionMatrix,
    GroupDataset,
    MultiGroupData,
    TotalEffectMatrix,
    center,
    find_causal_ordering,
    is_consistent_with_ordering,
    is_prefix_consistent,
    total_effects,
)
from .simgen import GroundTruth, SimSpec, default_sparsity, generate, load_catalog

__all__ = [
    "AcyclicityError",
    "CausalOrdering",
    "CollinearityError",
    "ConnectionMatrix",
    "DegenerateInputError",
    "DegenerateRegressorError",
    "EstimationResult",
    "GroundTruth",
    "GroupDataset",
    "GroupLingamError",
    "GroupWeights",
    "InvalidInputError",
    "KgvParams",
    "MultiGroupData",
    "MultiGroupDirectLiNGAM",
    "SimSpec",
    "TotalEffectMatrix",
    "center",
    "default_sparsity",
    "estimate_joint",
    "estimate_naive",
    "estimate_separate",
    "find_causal_ordering",
    "generate",
    "is_consistent_with_ordering",
    "is_prefix_consistent",
    "joint_score",
    "kgv_pairwise",
    "load_catalog",
    "t_kernel",
    "total_effects",
]

__version__ = "0.1.0"
