"""Signed blocky decompositions of bounded-norm integer matrices.

A blocky matrix is a boolean matrix whose support is a disjoint union of
combinatorial rectangles (equivalently: no 2x2 submatrix has exactly three
ones).  This package decomposes integer matrices with a bounded
factorization norm into short signed sums of blocky matrices, exactly and
with verified certificates, and ships the supporting machinery: the norm
solver and its lower bounds, exact (weighted) mistake-tree dimensions,
column stabilizers, greedy partitions, a brute-force complexity oracle,
deterministic generators, and a ten-point verification battery.
"""

from .config import RunConfig
from .core import (
    AlmostIntegerCertificate,
    BlockyCheck,
    BlockyMatrix,
    IntMatrix,
    RealMatrix,
    SignedBlockySum,
    blocky_to_matrix,
    convolution_matrix,
    evaluate_sum,
    is_blocky,
    round_half_down,
    round_to_integers,
)
from .factorize import (
    GammaFactorization,
    NormBracket,
    VerificationReport,
    factorization_from_blocky_sum,
    gamma2_bracket,
    gamma2_lower,
    gamma2_upper,
    verify_factorization,
)
from .generators import GeneratedInstance, GeneratorSpec, generate
from .littlestone import (
    BudgetExceeded,
    StabilizationResult,
    WeightedMistakeTree,
    bucket_stabilize,
    ldim,
    ldim_alpha,
    ldim_alpha_witness,
    ldim_witness,
    majority_stabilize,
)
from .partition import (
    AverageSplit,
    GreedyPartition,
    PartitionClass,
    greedy_l1_decompose,
    greedy_partition,
    subtract_average,
)
from .pipeline import (
    DecrementStep,
    PipelineReport,
    ReconstructionError,
    RoundingDriftError,
    decompose,
    exact_block_complexity,
    norm_decrement_step,
    random_lower_bound_experiment,
)
from .suite import SuiteContext, run_suite

__version__ = "0.1.0"

__all__ = [
    "AlmostIntegerCertificate",
    "AverageSplit",
    "BlockyCheck",
    "BlockyMatrix",
    "BudgetExceeded",
    "DecrementStep",
    "GammaFactorization",
    "GeneratedInstance",
    "GeneratorSpec",
    "GreedyPartition",
    "IntMatrix",
    "NormBracket",
    "PartitionClass",
    "PipelineReport",
    "RealMatrix",
    "ReconstructionError",
    "RoundingDriftError",
    "RunConfig",
    "SignedBlockySum",
    "StabilizationResult",
    "SuiteContext",
    "VerificationReport",
    "WeightedMistakeTree",
    "blocky_to_matrix",
    "bucket_stabilize",
    "convolution_matrix",
    "decompose",
    "evaluate_sum",
    "exact_block_complexity",
    "factorization_from_blocky_sum",
    "gamma2_bracket",
    "gamma2_lower",
    "gamma2_upper",
    "generate",
    "greedy_l1_decompose",
    "greedy_partition",
    "is_blocky",
    "ldim",
    "ldim_alpha",
    "ldim_alpha_witness",
    "ldim_witness",
    "majority_stabilize",
    "norm_decrement_step",
    "random_lower_bound_experiment",
    "round_half_down",
    "round_to_integers",
    "run_suite",
    "subtract_average",
    "verify_factorization",
    "__version__",
]
