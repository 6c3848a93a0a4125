"""Point-mass norms, induced kernels and spectral moments for positive definite
kernels on countable discrete sets."""

from .analysis import (
    CERTIFIED,
    DIVERGING,
    INCONCLUSIVE,
    FiltrationTrace,
    ScanPolicy,
    Verdict,
    del_projection,
    delta_norm_sq,
    filtration_scan,
    hf_constant_bound,
    induced_kernel_entry,
    l2_row_test,
    membership_scan,
    minor_ratio,
    pf_delta_norm_sq,
    projection_coeffs,
)
from .config import (
    GramMatrix,
    Kernel,
    PointConfiguration,
    assemble_gram,
    build_config,
    validate_pd,
)
from .errors import (
    Disconnected,
    DomainViolation,
    DuplicatePoint,
    IntegerOverflow,
    NonpositiveConductance,
    NormDivergent,
    NotIncreasing,
    NotPositiveDefinite,
    PointMassError,
    SelfLoop,
    SubsetMembershipUnverified,
)
from .gram import GramFactorization, border_extend, factorize, inverse, inverse_entry, log_det, solve
from .kernels import BuiltinKernelId, load_kernel_spec, make_kernel
from .moments import (
    MomentReport,
    moment_identity_check,
    mu_A_moments,
    mu_B_moments,
    network_mu_A_moments,
)
from .network import (
    NetworkGraph,
    delta_inner_energy,
    dipole,
    energy_inner,
    energy_kernel,
    laplacian_apply,
    load_network,
    network_moments,
)
from .sampling import (
    KernelExpansion,
    SampleSet,
    frame_lower_bound,
    interpolate,
    restriction_isometry_check,
    shannon_reconstruct,
)

__version__ = "0.1.0"
