"""Global value numbering with value expressions, plus a Herbrand oracle."""

from .analysis import AnalysisResult, NonConvergenceError, meet_many, pool_meet, run_gvn, transfer
from .ir import FlowGraph, normalize, parse_program, render_program, validate
from .pool import TOP, ExpressionPool, canonicalize, parse_pool, pools_equivalent, render_pool
from .redundancy import detect, eliminate

__all__ = [
    "AnalysisResult",
    "ExpressionPool",
    "FlowGraph",
    "NonConvergenceError",
    "TOP",
    "canonicalize",
    "detect",
    "eliminate",
    "meet_many",
    "normalize",
    "parse_pool",
    "parse_program",
    "pool_meet",
    "pools_equivalent",
    "render_pool",
    "render_program",
    "run_gvn",
    "transfer",
    "validate",
]
