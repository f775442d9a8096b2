"""Legendre/Gegenbauer expansions, positivity thresholds and Schoenberg tests."""

from .amplitude import (
    AmplitudeSpec,
    CoefficientStrategy,
    PrecisionWarning,
    TermFactorization,
    amplitude_value,
    divisors,
    expand_amplitude,
    factorize_term,
    min_coefficient,
)
from .basis import (
    BasisSpec,
    CoefficientVector,
    JacobiOperator,
    ScalarMode,
    apply_linear_factor,
    apply_x,
    eval_basis_series,
    gegenbauer_limit_check,
)
from .quadrature import QuadratureRule, coefficients_by_quadrature, gauss_legendre_rule
from .schoenberg import (
    AmplitudeProblem,
    SampleStats,
    SchoenbergProblem,
    estimate_alpha0,
    gram_matrix,
    harmonic_count,
    harmonic_count_at_degree,
    kernel_matrix,
    min_eigenvalue,
    n_schedule,
    psd_test,
    sample_unit_vectors,
)
from .search import BisectionConfig, InvalidBracket, bisect, critical_alpha, landscape

__version__ = "0.1.0"
