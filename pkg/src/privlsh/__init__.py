"""privlsh: privacy-preserving similarity search over random-projection hashes.

Users publish short hash strings instead of raw high-dimensional profiles;
two mechanisms (hash-then-flip and noise-then-hash) make the published
strings metrically private, an accountant turns per-bit budgets into total
budgets at a given input distance, and an audit suite verifies the
distributional claims empirically.
"""

from .exceptions import (
    DimensionMismatchError,
    EmptyDatasetError,
    InfeasibleError,
    InvalidParamsError,
    LengthMismatchError,
    OutOfRangeError,
    ParseError,
    UnknownIdError,
    ZeroVectorError,
)
from .vectors import (
    angular_distance,
    angular_to_euclidean,
    cosine_similarity,
    euclidean_distance,
    euclidean_to_angular,
    hamming_distance,
    normalize,
)
from .lsh import FAMILY_VERSION, ProjectionFamily, RandomProjectionHasher, hash_dataset, hash_vector, sample_family
from .mechanisms import (
    LSHRR,
    LapLSH,
    flip_probability,
    laplsh,
    lshrr,
    multivariate_laplace,
    randomized_response,
    randomized_response_bit,
    spherical_laplace_noise,
    uniform_bits,
)
from .privacy import (
    BudgetReport,
    PrivacyParams,
    budget_table,
    cxdp_params,
    cxdp_tail_budget,
    cxdp_to_pxdp_budget,
    epsilon_for_target_xi,
    kl_bernoulli,
    laplsh_budget,
    laplsh_budget_from_angle,
    ldp_budget,
    pseudometric_budget,
    pxdp_budget_simple,
    pxdp_budget_tight,
    rr_flip_probability,
    solve_alpha,
    worst_case_dp,
)
from .nns import Dataset, MatchingSummary, NeighborList, approx_knn, exact_knn, run_matching_experiment, utility_loss
from .data import EventRecord, SynthSpec, build_vectors, load_events, synthesize, truncate_dimensions
from .audit import (
    ChannelFunction,
    ChannelMatrix,
    CheckReport,
    LeakageReport,
    certify_pxdp,
    enumerate_2d_channel,
    error_bound_check,
    estimate_collision_rate,
    hamming_law_check,
    hyperplane_release_leakage,
)

__version__ = "0.1.0"
