"""Trapped-ion quantum sensing of phase-space displacement parameters.

Simulation of the three-state (Lambda) and five-state (four-pod)
measurement protocols on truncated Fock spaces, closed-form effective
models, classical/quantum Fisher-information analysis with Cramer-Rao
bounds, and seeded Monte-Carlo maximum-likelihood studies of bound
attainment.
"""

__version__ = "0.1.0"

from .params import (  # noqa: F401
    ConfigError,
    DriveParams,
    InternalParams,
    InvalidParameterError,
    IonSpecies,
    ProtocolParams,
    TrapConfig,
    derive_internal,
    fig2_defaults,
    fig4_defaults,
    ground_state_spread,
    parse_config,
    serialize_config,
    yb171,
)
from .hilbert import FockSpace, coherent_state, evolve_unitary, fock_operators, tensor  # noqa: F401
from .hamiltonians import (  # noqa: F401
    FOURPOD5,
    LAMBDA3,
    HamiltonianSet,
    SystemModel,
    build_fourpod,
    build_lambda,
    displacement_unitary,
    effective_fourpod,
    effective_lambda,
    generator_residual,
)
from .dynamics import ProbabilityTrajectory, apply_pi_half, run_protocol  # noqa: F401
from .analytic import (  # noqa: F401
    FourPodModel,
    LambdaModel,
    post_pulse_state_fourpod,
    post_pulse_state_lambda,
    propagator_fourpod,
    propagator_lambda,
)
from .fisher import (  # noqa: F401
    FisherMatrix,
    ParamChart,
    cfi_matrix,
    crb,
    qfi_pure,
    reparameterize,
    weak_commutativity,
)
from .estimation import (  # noqa: F401
    EstimateResult,
    MeasurementRecord,
    covariance_study,
    log_likelihood,
    mle,
    sample_shots,
)
