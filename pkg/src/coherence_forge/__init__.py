"""Robustness of asymmetry and coherence, computed with a built-in SDP solver."""

from .coherence import (
    BoundReport,
    bound_report,
    detect_exact_class,
    f_lower_bound,
    l1_coherence,
    l1_sandwich,
    max_diag_entry_bound,
    robustness_of_coherence,
)
from .discrimination import (
    DiscriminationGame,
    Povm,
    advantage_ratio,
    certificate_povm,
    max_advantage_over_priors,
    optimal_success_probability,
    prior_grid,
    success_probability,
)
from .linalg import ValidationError, as_density_matrix, as_hermitian, eig_hermitian, is_psd, purity, schatten_norm
from .randgen import (
    SeededSource,
    maximally_coherent_state,
    random_covariant_channel,
    random_density_matrix,
    random_generalized_x_state,
    random_pure_state,
    rho_p_family,
)
from .robustness import (
    RobustnessCertificate,
    bound_chain_purity,
    check_convexity,
    check_monotonicity,
    estimate_from_data,
    robustness_of_asymmetry,
    witness_from_data,
)
from .sdp import SdpProblem, SolverOptions, Status, solve
from .symmetry import CyclicRep, GroupRep, QuantumChannel, is_covariant, is_symmetric, twirl

__version__ = "0.1.0"
