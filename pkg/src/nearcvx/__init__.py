"""Exact computations for nearly convex sets, functions and optimization problems."""

from .errors import (
    CapExceeded,
    DimensionMismatch,
    EmptySetError,
    HypothesisViolated,
    ImproperFunction,
    InfeasiblePoint,
    KindMismatch,
    NearCvxError,
    ParseError,
    PointNotInDomain,
    QuadraticConstraintError,
    UnsupportedShape,
)
from .exact import (
    AffineForm,
    LinearConstraint,
    LPResult,
    Rel,
    Status,
    box,
    eq,
    fm_project,
    ge,
    gt,
    le,
    lp_solve,
    lp_strict_feasible,
    lt,
    solve_linear_system,
)
from .functions import (
    INF,
    LscFunction,
    MaxAffine,
    NCFunction,
    Override,
    Quadratic,
    affine,
    evaluate,
    fn_max,
    fn_sum,
    indicator,
    lsc_hull,
    subdiff,
    subdiff_lsc,
    validate_function,
)
from .kkt import (
    ConstrainedProblem,
    assemble_feasible_set,
    check_slater,
    closure_omega1,
    kkt_certify_associated,
    kkt_transfer_original,
    normal_cone_sublevel,
    solve_constrained,
)
from .opt import (
    Classification,
    DiffSet,
    Problem,
    associate,
    check_regularity,
    classify_point,
    fermat_check,
    fermat_check_associated,
    local_global_check,
    solve_associated,
    solve_original,
)
from .oracle import GridSpec, grid_liminf, grid_local_minima, grid_min, ho_witness_test, sampled_near_convexity_check
from .sets import (
    CarvedPolyhedron,
    Cell,
    FGSet,
    Polyhedron,
    fg_cone,
    fg_equal,
    fg_member,
    fg_sum,
    intersect_carved,
    member,
    normal_cone,
    product,
    validate_carved,
)

__version__ = "0.1.0"
