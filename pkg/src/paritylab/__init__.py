"""Desk-scale laboratory for memory-bounded parity learning: an exact
GF(2) affine-subspace engine, branching-program simulation, constructive
subspace grouping and program reduction, reach-probability bounds,
streaming learners, and an inner-product bounded-storage cipher."""

from .gf2 import (
    AffineSubspace,
    BitVector,
    DimensionMismatch,
    EmptySubspaceError,
    VectorSubspace,
    contains,
    inner_product,
    intersect_hyperplane,
    is_subset,
    orthogonal_space,
    parse_subspace,
    rref,
    sample_point,
)
from .distributions import (
    ExactDistribution,
    FourierTable,
    SubspaceMixture,
    check_fourier_closeness,
    inverse_walsh,
    l1_distance,
    mixture_distribution,
    uniform_over,
    walsh_transform,
)
from .partition import (
    SubspacePartition,
    build_partition,
    find_representative_subspace,
    hyperplane_concentration,
)
from .bp import (
    AffineLabels,
    BranchingProgram,
    JointDistribution,
    Sample,
    layer_accuracy,
    reach_distribution,
    run_path,
    success_probability,
    validate_affine,
)
from .reduction import AffineReduction, ReductionParams, reduce_to_affine, verify_reduction
from .lowerbound import reach_probability_bound, tradeoff_exponent, verify_reach_bound
from .learners import (
    Learner,
    TradeoffPoint,
    estimate_sample_complexity,
    exhaustive_learner,
    gaussian_learner,
    learner_to_bp,
    prefix_pivot_learner,
)
from .crypto import (
    Attacker,
    Frame,
    SecretKey,
    decode_stream,
    decrypt_bit,
    encode_stream,
    encrypt_bit,
    keygen,
    run_attack,
    window_attacker,
)

__version__ = "0.1.0"
