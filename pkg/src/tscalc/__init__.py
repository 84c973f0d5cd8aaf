"""Time-scale calculus: jump operators, delta/nabla derivatives, monotone
l'Hopital rules with their property suite, q-calculus and bounds for the
q-exponential."""
from .errors import TimeScaleError
from .gridfn import (
    GridFunction,
    Monotonicity,
    MonotonicityVerdict,
    cauchy_mvt_witnesses,
    classify_monotonicity,
    delta_derivative,
    dual_function,
    load_csv,
    nabla_derivative,
)
from .lhopital import (
    LimitFromSamples,
    Supplied,
    SuiteConfig,
    run_property_suite,
    verify_delta_rule,
    verify_nabla_rule,
    verify_nabla_via_duality,
)
from .numeric import Rational, exact
from .qbounds import BoundProblem, lower_bound, sandwich_report, upper_bound, verify_derivative_chain
from .qcalc import QContext, q_derivative, q_exponential, q_factorial, q_number, q_poly
from .scale import (
    ContinuousInterval,
    FiniteSet,
    QScale,
    ScalePoint,
    TimeScale,
    TsInterval,
    UniformLattice,
    parse_scale,
)

__version__ = "0.1.0"
