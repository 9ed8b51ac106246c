"""Refinable Brownian paths with certified queries and exit-sampling solvers.

A path is held as a seeded coefficient table that any query can refine on
demand; answers come back as enclosures or decisions whose error is bounded
at a stated confidence.  On top of the paths sit planar first-hit searches,
closed-form and quadrature reference laws, a Monte Carlo Dirichlet solver on
squared domains, and the statistical suites that hold it all to account.
"""

from importlib.metadata import PackageNotFoundError, version as _dist_version

try:
    __version__ = _dist_version("bmkit")
except PackageNotFoundError:  # running from an uninstalled source tree
    __version__ = "0.0.0"

from .schauder import (
    DEFAULT_C,
    MAX_LEVEL,
    coefficient_counter,
    level_for_pad,
    modulus_confidence,
    modulus_pad,
    peak,
    tail_bound,
    tent,
)
from .rng import inverse_normal_cdf, normal_at, raw_word, word_to_uniform
from .path import (
    Enclosure,
    ExtendedPath,
    PathCoefficients,
    eval_path,
    sample_path,
    scaled,
    shifted,
)
from .extrema import (
    Decision,
    HittingRecord,
    RefinementBudgetError,
    ZeroDecision,
    first_hit_level,
    first_zero,
    has_zero,
    level_for_tail,
    path_max,
    path_min,
)
from .planar import (
    PlanarPath,
    Segment,
    first_hit_boundary,
    first_hit_segment,
    square_boundary,
)
from .quadrature import (
    QuadratureResult,
    QuadratureSpec,
    ToleranceError,
    fourier_cos,
    integrate,
    integrate_to_inf,
)
from .analytics import (
    EULER_GAMMA,
    TWO_INTERVAL_CONSTANT,
    bessel_L,
    bessel_first_passage,
    bessel_i0,
    bessel_k0,
    level_first_passage,
    max_cdf,
    spitzer_limit,
    two_interval_bound,
    zero_hit_prob,
)
from .dirichlet import (
    BoundaryCondition,
    InteriorRegion,
    MonteCarloEstimate,
    RefinementStep,
    SquaredDomain,
    dump_domain,
    flood_fill_interior,
    load_domain,
    solve_at,
    solve_refining,
    square_of,
    transfer_condition,
    unit_square_domain,
)
from .validate import SUITES, CheckResult, SuiteReport, run_suite

__all__ = [
    "__version__",
    # construction
    "DEFAULT_C", "MAX_LEVEL", "peak", "tent", "coefficient_counter",
    "tail_bound", "modulus_pad", "modulus_confidence", "level_for_pad",
    "inverse_normal_cdf", "normal_at", "raw_word", "word_to_uniform",
    "Enclosure", "PathCoefficients", "ExtendedPath", "sample_path",
    "eval_path", "scaled", "shifted",
    # certified queries
    "Decision", "ZeroDecision", "HittingRecord", "RefinementBudgetError",
    "level_for_tail", "path_max", "path_min", "has_zero", "first_zero",
    "first_hit_level",
    # planar paths
    "PlanarPath", "Segment", "square_boundary", "first_hit_segment",
    "first_hit_boundary",
    # quadrature and reference laws
    "QuadratureSpec", "QuadratureResult", "ToleranceError", "integrate",
    "integrate_to_inf", "fourier_cos",
    "EULER_GAMMA", "TWO_INTERVAL_CONSTANT", "zero_hit_prob",
    "two_interval_bound", "max_cdf", "bessel_i0", "bessel_k0", "bessel_L",
    "level_first_passage", "bessel_first_passage", "spitzer_limit",
    # Dirichlet solver
    "SquaredDomain", "BoundaryCondition", "InteriorRegion",
    "MonteCarloEstimate", "RefinementStep", "square_of",
    "unit_square_domain", "flood_fill_interior", "transfer_condition",
    "solve_at", "solve_refining", "dump_domain", "load_domain",
    # validation
    "CheckResult", "SuiteReport", "SUITES", "run_suite",
]
