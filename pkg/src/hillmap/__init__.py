"""hillmap: stability maps of Hill's equation.

Traces the stability boundaries (Arnold tongues and the vibrational
stabilization window) of

    theta'' + 2*kappa*theta' + (a + eps*p(t)) theta = 0

directly, by integrating the ODE that the implicit function theorem gives
for the contour |tr of the monodromy matrix| = target in (eps, a) space,
and validates the result against a conventional grid + marching-squares
baseline.
"""

__version__ = "0.1.0"

from .baseline import (
    BenchReport,
    Classification,
    ContourPolyline,
    Stability,
    StabilityGrid,
    benchmark,
    classify,
    grid_scan,
    marching_squares,
    read_grid_csv,
    write_grid_csv,
)
from .damped import (
    DampedCriterion,
    TongueTip,
    damped_monodromy_direct,
    damped_threshold,
    find_tongue_tip,
    is_stable_damped,
    trace_damped_tongue,
    transformed_monodromy,
)
from .errors import (
    BothDerivativesVanish,
    BracketNotFound,
    DutyOutOfRange,
    EmptyPiecewise,
    ForcingError,
    HillMapError,
    MeanNotZero,
    NoWindowFound,
    NonFiniteState,
    TipNotFound,
)
from .forcing import (
    BUILTIN_FORCINGS,
    ForcingSpec,
    cosine,
    eval_forcing,
    parse_forcing,
    piecewise,
    ramp,
    square,
    validate,
)
from .monodromy import (
    RK_PAIR,
    IntegratorConfig,
    Params,
    Scheme,
    SensitivityBundle,
    count_evaluations,
    generator,
    monodromy,
    monodromy_with_sensitivities,
    trace_objective,
)
from .tracer import (
    BoundaryCurve,
    BoundaryPoint,
    Branch,
    Orientation,
    TraceConfig,
    boundary_slope,
    bootstrap_branch,
    trace_from,
    trace_kapitza_boundary,
    trace_tongue,
)
from .document import (
    StabilityMapDocument,
    build_metadata,
    read_curves_csv,
    read_document,
    verify_curves,
    write_curves_csv,
    write_document,
)

__all__ = [
    "__version__",
    # forcing
    "ForcingSpec", "cosine", "square", "ramp", "piecewise", "parse_forcing",
    "eval_forcing", "validate", "BUILTIN_FORCINGS",
    # monodromy
    "Params", "Scheme", "IntegratorConfig", "SensitivityBundle", "generator",
    "monodromy", "monodromy_with_sensitivities", "trace_objective", "RK_PAIR",
    "count_evaluations",
    # tracer
    "Branch", "Orientation", "BoundaryPoint", "BoundaryCurve", "TraceConfig",
    "boundary_slope", "bootstrap_branch", "trace_tongue", "trace_from",
    "trace_kapitza_boundary",
    # damped
    "DampedCriterion", "TongueTip", "damped_threshold", "transformed_monodromy",
    "damped_monodromy_direct", "is_stable_damped", "find_tongue_tip",
    "trace_damped_tongue",
    # baseline
    "Stability", "Classification", "StabilityGrid", "ContourPolyline",
    "grid_scan", "marching_squares", "classify", "benchmark", "BenchReport",
    "write_grid_csv", "read_grid_csv",
    # documents
    "StabilityMapDocument", "build_metadata", "write_document", "read_document",
    "write_curves_csv", "read_curves_csv", "verify_curves",
    # errors
    "HillMapError", "ForcingError", "MeanNotZero", "DutyOutOfRange",
    "EmptyPiecewise", "NonFiniteState", "BothDerivativesVanish",
    "BracketNotFound", "TipNotFound", "NoWindowFound",
]
