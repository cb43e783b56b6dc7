"""caplab: hyperbolicity verdicts and p-capacity bounds on warped-product
comparison constellations, with built-in brute-force cross-checks."""

from .capacity import (
    CapacityEstimate,
    PotentialTable,
    dirichlet_potential,
    discrete_energy_oracle,
    drifted_capacity,
    drifted_capacity_limit,
    exact_model_pcapacity,
    intrinsic_boundary_flux,
    ode_residual,
    pcap_lower_bound,
    potential_table,
    verify_comparison_inequality,
)
from .classify import (
    HadamardCheck,
    ObstructionReport,
    Verdict,
    classify,
    hadamard_check,
    immersion_obstruction,
    mp3_2hyperbolic_check,
)
from .config import JobConfig, Numerics, load_config, parse_config
from .constellation import (
    Annulus,
    BalanceReport,
    Bounds,
    Constellation,
    LambdaWeight,
    check_balanced,
    lambda_weight,
)
from .errors import (
    BalanceViolation,
    CaplabError,
    ConfigError,
    DomainError,
    ExpressionSyntaxError,
    HypothesisViolation,
    InvalidWarping,
    NonConvergence,
    PreconditionError,
    QuadratureFailure,
    UnknownIdentifier,
    VerificationError,
)
from .expressions import RadialExpr, differentiate, evaluate, parse, to_string
from .models import (
    ExpressionWarping,
    ModelSpace,
    SpaceForm,
    unit_sphere_area,
)
from .quadrature import IntegralResult, TailVerdict, classify_tail, integrate

__version__ = "0.1.0"
