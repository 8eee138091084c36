"""Coupled fixed points of mixed monotone map pairs on ordered box spaces.

Picard solver with a priori rate certificates for six contraction classes,
sampled and exhaustive condition checks, LP constant estimation and a
problem-file CLI. Hot loops run in a compiled core when it is built, with a
NumPy fallback that gives bit-identical results.
"""

from ._kernels import BACKEND
from .contraction import (
    CLASSES,
    BanachType,
    ChatterjeaType,
    ContractionClass,
    HybridType,
    KannanType,
    QuasiType,
    ReichType,
    ViolationReport,
    condition_slack,
    estimate_constants,
    make_class,
    verify_condition,
)
from .coupled_maps import (
    CoupledMapPair,
    MapSpec,
    SamplerConfig,
    check_closure,
    check_mixed_monotone,
    check_seed,
    eval_F,
    eval_G,
    iterate_n,
    iterate_step,
    residual,
)
from .errors import (
    ConfigError,
    DivergenceError,
    EstimationError,
    FGCoupledError,
    InputError,
    ProblemSyntaxError,
)
from .oracle import GridSpec, audit_trace, condition_brute_force, grid_residual_minimizer
from .ordered_metric import (
    ProductPoint,
    SpaceDescriptor,
    comparable,
    leq,
    metric,
    product_leq,
    product_metric,
)
from .solver import (
    Certificate,
    FixedPointResult,
    IterationTrace,
    SolveConfig,
    apriori_bound,
    solve,
    uniqueness_probe,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
