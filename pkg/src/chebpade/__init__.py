"""Chebyshev-Pade approximants of real algebraic functions on [-1,1],
mixed Green-logarithmic equilibrium problems, and stationary-compact search."""

__version__ = "0.1.0"

from .chebseries import (
    ChebSeries,
    CbrtTriple,
    FunctionSum,
    InvalidFunctionError,
    MarkovUniform,
    NearSingularityError,
    Rational,
    SqrtConjPair,
    TruncationError,
    cheb_coeffs,
    eval_continuation,
    eval_on_E,
    series_product_coeff,
)
from .cpade import (
    BakerNonexistence,
    RationalApproximant,
    baker,
    frobenius,
    poles,
)
from .equilibrium import (
    AdmissibilityError,
    CirclineArc,
    DiscreteMeasure,
    EquilibriumResult,
    ResolutionError,
    Segment,
    arcsine_measure,
    balayage,
    green_function,
    potentials,
    s_property_residual,
    solve_equilibrium,
)
from .harness import (
    PoleDistributionReport,
    RateReport,
    markov_theoremA_suite,
    measure_rates,
    pole_distribution,
)
from .scompact import (
    FamilyBoundaryError,
    SearchConfig,
    StationaryCompactReport,
    UnsupportedFamilyError,
    check_theorem2_hypothesis,
    find_stationary_compact,
    rho_index,
)
