"""Branching random walk on Z with one branching source and 2n symmetric absorbers."""

from .criticality import (
    CriticalityReport,
    RecurrenceBasis,
    beta_critical,
    beta_critical_no_absorbers,
    beta_star_critical_inf,
    classify_regime,
    closed_form_I,
    compute_J,
    lambda_infinite,
    recurrence_basis,
    recurrence_I,
)
from .errors import (
    BRWError,
    DomainError,
    EstimationError,
    InternalContradictionError,
    NumericalFailure,
    StepSizeError,
    ValidationError,
    WindowTooSmallError,
)
from .model import (
    ModelParams,
    OffspringLaw,
    TruncatedOperator,
    build_offspring_law,
    build_truncated_operator,
    top_eigenpair,
)
from .spectral import (
    DeltaSystem,
    SpectralSolution,
    cosine_poisson_integral,
    delta_deflated,
    delta_det,
    eigenfunction_extend,
    eigenfunction_values,
    find_spectral_solution,
    lambda_to_zeta,
    zeta_to_lambda,
)

__version__ = "0.1.0"
