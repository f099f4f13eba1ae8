"""Wigner-function witnesses of quantum non-Gaussianity for a single bosonic mode."""

__version__ = "0.1.0"

from .channels import (
    Envelope,
    GaussianMapSpec,
    LossParam,
    apply_gaussian_map,
    apply_loss,
    compose_loss,
    loss_kraus_operators,
    lossy_parity,
    lossy_wigner,
    parse_map,
)
from .errors import (
    ContractError,
    DimensionError,
    DomainError,
    OptimizationError,
    QuadratureError,
    SpecError,
    TruncationError,
    TruncationWarning,
    WitnessError,
)
from .exemplar_states import (
    PacParams,
    PssParams,
    family_state,
    fock_to_fock,
    pac_to_fock,
    pac_wigner,
    pss_to_fock,
    pss_wigner,
)
from .fock_core import (
    DEFAULT_TOL,
    FockOperator,
    FockVector,
    Tolerances,
    displacement_matrix,
    mean_photon,
    parity_expectation,
    squeezing_matrix,
    wigner_at,
)
from .gaussian_states import (
    GaussianMixture,
    PureGaussianParams,
    saturating_state,
    to_fock,
    wigner_origin_pure_gaussian,
)
from .oracle import OracleReport, cross_validate_closed_forms, run_hull_campaign, wigner_via_parity
from .witness import (
    EpsMaxResult,
    WitnessReport,
    bound_min,
    delta1,
    delta2,
    eps_max,
    optimize_displacement,
    pss_optimal_squeezing,
)
