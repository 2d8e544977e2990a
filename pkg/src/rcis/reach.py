"""One-step backward reachable sets and the two fixed-point iterations.

``pre(X)`` is the set of states from which some safe input keeps the
successor inside ``X`` for every disturbance.  Iterating it from a small
robust controlled invariant seed grows an inner approximation of the
maximal invariant set (inside-out); iterating it from the projected safe
set shrinks an outer approximation (outside-in).
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geom
from .errors import NumericFailure, PreconditionError, SeedNotInvariant
from .geom import Polytope
from .optim import TOL_FEAS
from .system import Problem

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-6
DEFAULT_K_MAX = 200


class TraceStatus(enum.Enum):
    FIXED_POINT = "FixedPoint"
    BUDGET_EXHAUSTED = "BudgetExhausted"
    EMPTY = "Empty"


@dataclass
class IterationTrace:
    """Iterates ``C_0, ..., C_K`` of the backward recursion.

    ``fixed_point_k`` is the step ``k`` at which ``C_k`` matched ``C_{k-1}``
    (only set when ``status`` is ``FIXED_POINT``).  ``converged_k`` is the
    first index whose iterate already equals the limit, so it is one less
    than ``fixed_point_k`` unless the seed itself is the fixed point.
    """

    sets: list
    status: TraceStatus
    fixed_point_k: Optional[int] = None
    step_times: list = field(default_factory=list)
    eps: float = DEFAULT_EPS

    @property
    def converged_k(self) -> Optional[int]:
        if self.status is not TraceStatus.FIXED_POINT:
            return None
        return self.converged_at()

    @property
    def final(self) -> Polytope:
        return self.sets[-1]

    @property
    def K(self) -> int:
        return len(self.sets) - 1

    def converged_at(self, eps: Optional[float] = None) -> int:
        """Smallest ``k`` whose iterate already equals the final one."""
        eps = self.eps if eps is None else eps
        for k, C in enumerate(self.sets):
            if geom.equal_within(C, self.final, eps):
                return k
        return self.K


def pre(X: Polytope, p: Problem) -> Polytope:
    """Robust one-step backward reachable set of ``X`` within ``p.safe``.

    ``X`` is first eroded by ``E D`` (one support LP per row), pulled back
    through ``[A B]``, intersected with the safe set and finally projected
    onto the state coordinates.  The result is redundancy-free and may be
    empty.
    """
    s = p.system
    n, m = s.n, s.m
    if X.dim != n:
        raise ValueError(f"target set has dim {X.dim}, expected {n}")
    if geom.is_empty(X):
        return Polytope.empty(n)
    # support of E D along H_i equals support of D along E^T H_i
    tighten = np.array([geom.support(p.disturbance, s.E.T @ Hi) for Hi in X.H])
    AB = np.hstack([s.A, s.B])
    H = np.vstack([X.H @ AB, p.safe.H])
    h = np.concatenate([X.h - tighten, p.safe.h])
    lifted = Polytope(H, h, dim=n + m)
    return geom.project(lifted, n)


def pre_k(X: Polytope, p: Problem, k: int, eps: float = DEFAULT_EPS) -> IterationTrace:
    """Apply :func:`pre` up to ``k`` times, stopping early at an
    ``eps``-fixed point or an empty iterate."""
    if k < 1:
        raise ValueError("k must be at least 1")
    sets = [X]
    times = []
    for step in range(1, k + 1):
        t0 = time.perf_counter()
        Y = pre(sets[-1], p)
        times.append(time.perf_counter() - t0)
        sets.append(Y)
        if geom.is_empty(Y):
            logger.info("iterate %d is empty", step)
            return IterationTrace(sets, TraceStatus.EMPTY, None, times, eps)
        if geom.equal_within(Y, sets[-2], eps):
            logger.info("fixed point reached at step %d", step)
            return IterationTrace(sets, TraceStatus.FIXED_POINT, step, times, eps)
        logger.debug("step %d: %d rows", step, Y.n_rows)
    return IterationTrace(sets, TraceStatus.BUDGET_EXHAUSTED, None, times, eps)


def is_invariant(C: Polytope, p: Problem, tol: float = TOL_FEAS) -> bool:
    """``C`` is robust controlled invariant iff ``C`` lies inside ``pre(C)``."""
    if geom.is_empty(C):
        return True
    return geom.contains(pre(C, p), C, tol=tol)


def inside_out(p: Problem, k_max: int = DEFAULT_K_MAX, eps: float = DEFAULT_EPS) -> IterationTrace:
    """Grow the seed of ``p`` by repeated :func:`pre` until it stops changing.

    Raises:
        SeedNotInvariant: the problem has no seed or the seed is not a
            robust controlled invariant set.
    """
    if p.seed is None:
        raise SeedNotInvariant("inside-out needs a seed set")
    if not is_invariant(p.seed, p):
        raise SeedNotInvariant("seed is not robust controlled invariant")
    trace = pre_k(p.seed, p, k_max, eps)
    if not is_invariant(trace.final, p):
        raise NumericFailure("final inside-out iterate failed the invariance check")
    return trace


def outside_in(p: Problem, k_max: int = DEFAULT_K_MAX, eps: float = DEFAULT_EPS) -> IterationTrace:
    """Shrink the projected safe set by repeated :func:`pre`; the seed of
    ``p`` is ignored."""
    return pre_k(p.state_safe, p, k_max, eps)


def require_fixed_point(trace: IterationTrace) -> None:
    if trace.status is not TraceStatus.FIXED_POINT:
        raise PreconditionError(f"trace ended with {trace.status.value}, not a fixed point")
