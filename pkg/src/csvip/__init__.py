"""Solvers for common solutions to variational inequalities over convex sets.

The package builds problems from (convex set, monotone operator) pairs,
certifies admissible step lengths, and offers alternating, sequential,
parallel, and schedule-driven projection schemes plus independent oracles,
diagnostics, a JSON interchange format, a command-line client, and an HTTP
service.
"""

__version__ = "0.1.0"

from .diagnostics import (
    DivergenceStatus,
    FejerReport,
    divergence_monitor,
    fejer_check,
    norm_growth_verdict,
    residual_series,
)
from .errors import (
    ConvergenceError,
    CsvipError,
    DimensionMismatchError,
    InconsistentSystemError,
    InvalidProblemError,
    InvalidSetError,
    NotIsmError,
    OracleError,
    ProblemFormatError,
    ScheduleError,
    StepSizeError,
)
from .geometry import (
    AffineSubspace,
    Ball,
    Box,
    ConvexSet,
    Halfspace,
    Hyperplane,
    Intersection,
    Simplex,
    WholeSpace,
    contains,
    distance,
    project,
    project_intersection,
)
from .operators import (
    AffineOperator,
    ConstantOperator,
    IsmOperator,
    OperatorClassReport,
    StepOperator,
    StepSize,
    ZeroOperator,
    check_operator_class,
    estimate_ism_constant,
    forward_step,
    largest_ism_constant,
    step_operator_apply,
    validate_step,
    vip_residual,
)
from .oracle import (
    OracleResult,
    extragradient_solve,
    grid_search_vip,
    subspace_intersection_projection,
)
from .problem import (
    CsvipProblem,
    Cyclic,
    ExplicitSchedule,
    IterationTrace,
    RandomSchedule,
    RunResult,
    RunStatus,
    Schedule,
    StopRule,
)
from .problemio import (
    FORMAT_VERSION,
    ParsedProblem,
    emit_result,
    parse_problem,
    parse_problem_document,
    parse_result,
    result_to_document,
)
from .solvers import (
    default_step,
    solve_alternating,
    solve_parallel,
    solve_sequential,
    solve_unrestricted,
)

__all__ = [
    "__version__",
    # errors
    "CsvipError",
    "DimensionMismatchError",
    "InvalidSetError",
    "InconsistentSystemError",
    "InvalidProblemError",
    "NotIsmError",
    "StepSizeError",
    "ScheduleError",
    "ConvergenceError",
    "OracleError",
    "ProblemFormatError",
    # geometry
    "ConvexSet",
    "Halfspace",
    "Hyperplane",
    "Box",
    "Ball",
    "AffineSubspace",
    "Simplex",
    "WholeSpace",
    "Intersection",
    "project",
    "contains",
    "distance",
    "project_intersection",
    # operators
    "IsmOperator",
    "ZeroOperator",
    "ConstantOperator",
    "AffineOperator",
    "largest_ism_constant",
    "estimate_ism_constant",
    "StepSize",
    "validate_step",
    "forward_step",
    "StepOperator",
    "step_operator_apply",
    "vip_residual",
    "OperatorClassReport",
    "check_operator_class",
    # problem
    "CsvipProblem",
    "Schedule",
    "Cyclic",
    "RandomSchedule",
    "ExplicitSchedule",
    "StopRule",
    "RunStatus",
    "IterationTrace",
    "RunResult",
    # solvers
    "default_step",
    "solve_alternating",
    "solve_sequential",
    "solve_parallel",
    "solve_unrestricted",
    # diagnostics
    "FejerReport",
    "fejer_check",
    "DivergenceStatus",
    "divergence_monitor",
    "norm_growth_verdict",
    "residual_series",
    # oracle
    "OracleResult",
    "extragradient_solve",
    "subspace_intersection_projection",
    "grid_search_vip",
    # problemio
    "FORMAT_VERSION",
    "ParsedProblem",
    "parse_problem",
    "parse_problem_document",
    "result_to_document",
    "emit_result",
    "parse_result",
]
