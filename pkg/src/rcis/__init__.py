"""Backward reachable sets of robust controlled invariant sets for
disturbed linear systems, with convergence diagnostics."""

from .errors import RcisError
from .geom import Polytope
from .reach import IterationTrace, TraceStatus, inside_out, outside_in, pre, pre_k
from .system import LinearSystem, Problem, load_problem, make_problem

__all__ = [
    "IterationTrace",
    "LinearSystem",
    "Polytope",
    "Problem",
    "RcisError",
    "TraceStatus",
    "inside_out",
    "load_problem",
    "make_problem",
    "outside_in",
    "pre",
    "pre_k",
]
