"""Symbolic curvature and Cotton-tensor engine for three-dimensional metrics."""

from .analysis import (
    AmbiguousClassification,
    JordanType,
    SolitonSpec,
    ecs_predicate,
    jordan_type,
    nilpotency_index,
    ricci_recurrence,
    soliton_residual,
    walker_ricci_soliton_field,
    walker_ricci_soliton_pde,
)
from .curvature import (
    CurvaturePack,
    christoffel,
    cotton2,
    cotton3,
    cotton_gradient,
    cotton_operator,
    curvature_pack,
    parallel_cotton_system,
    ricci,
    ricci_operator,
    riemann,
    scalar,
    schouten,
)
from .families import (
    CoordMap,
    affine_isometry,
    family6,
    product_metric,
    pullback,
    scaling_map,
    shift_map,
    strict_walker,
    theorem_metric,
    verify_isometry,
    walker,
)
from .numoracle import CompareReport, NumericMetric, compare, fd_christoffel, fd_cotton2, fd_ricci
from .report import Check, Report
from .symexpr import (
    Chart,
    Expr,
    ExprError,
    FuncBinding,
    FuncSym,
    ParseError,
    derive,
    eval_numeric,
    is_zero,
    parse_expr,
    substitute,
)
from .tensor import (
    MetricChart,
    MetricError,
    TensorField,
    build_metric,
    covariant_derivative,
    hessian,
    hodge_dual_cotton,
    lie_derivative_metric,
    musical,
    vector_field,
)

__version__ = "0.1.0"
