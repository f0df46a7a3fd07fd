"""Limit-point/limit-circle classification for -y'' + q(x) y on an interval.

The package decides essential self-adjointness of the minimal operator
through Weyl's alternative (limit point at both endpoints), constructs
the one-parameter family of self-adjoint extensions of the free
half-line operator, and ships the numeric regularity checks the other
modules are tested against.
"""

from .classify import (
    ClassificationReport,
    DeficiencyIndices,
    Endpoint,
    EndpointClass,
    EndpointVerdict,
    Engine,
    SelfAdjointness,
    TailReport,
    classify_asymptotic,
    classify_interval,
    classify_numeric,
    deficiency_indices,
    is_regular_endpoint,
    square_integrable_tail,
    verdict,
)
from .errors import (
    AsymptoticsUnavailableError,
    BumpNotInteriorError,
    GridMismatchError,
    InconclusiveInputError,
    InsufficientTailError,
    IntegrationError,
    LplcError,
    MaxStepsExceededError,
    MissingDerivativeError,
    NonFiniteError,
    OutOfRangeError,
    PotentialEvaluationError,
    SingularRatioError,
    StepUnderflowError,
)
from .extensions import (
    BoundaryCondition,
    DeficiencyFunction,
    ExtensionDomainElement,
    adjoint_ratio,
    boundary_condition,
    deficiency_function,
    deficiency_norm_squared,
    domain_membership_residual,
    isometry_phase,
    sequence_f,
    sequence_g,
)
from .odeint import (
    ComplexState,
    IntegratorConfig,
    SolutionTrace,
    fundamental_pair,
    green_identity_residual,
    integrate,
    integrate_grid,
    wronskian,
    wronskian_values,
)
from .potentials import (
    Coulomb,
    EffectiveProblem,
    Harmonic,
    InverseSquare,
    Potential,
    PowerLaw,
    Sum,
    Tabulated,
    Zero,
    effective_potential,
    evaluate,
    lambda_nl,
    origin_coefficient,
    rho_nl,
)
from .sobolev import (
    BumpTest,
    SampledFunction,
    W21Report,
    antiderivative,
    antiderivative_samples,
    check_fundamental_theorem,
    check_weak_derivative,
    w21_report,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
