"""Closed forms for the scalar system ``x+ = alpha x + u + d``.

With ``|u| <= u_max``, ``|d| <= d_max``, ``|x| <= x_max`` and the symmetric
seed ``[-c0, c0]`` the backward reachable sets stay symmetric intervals, and
their radii follow a one-line recursion.  The functions here evaluate its
solution and serve as an independent check on the polytope pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import NotInvariantSeed, WrongCase
from .system import Problem, problem_from_dict, scalar_problem_dict

CASE_TOL = 1e-12


@dataclass(frozen=True)
class ScalarProblem:
    alpha: float
    u_max: float
    d_max: float
    x_max: float
    c0: float

    def __post_init__(self):
        if self.alpha == 0 or abs(abs(self.alpha) - 1.0) < CASE_TOL:
            raise ValueError("alpha must be nonzero with |alpha| != 1")
        for name in ("u_max", "d_max", "x_max", "c0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def case(self) -> Optional[int]:
        """1 for a stable plant with weak input, 2 for an unstable plant with
        dominant input, ``None`` otherwise."""
        a = abs(self.alpha)
        cd = c_d(self)
        if a < 1 and self.u_max <= self.d_max and self.x_max > cd >= self.d_max - CASE_TOL:
            return 1
        if a > 1 and self.u_max >= self.d_max and self.x_max >= cd >= self.d_max - CASE_TOL:
            return 2
        return None

    def seed_is_invariant(self) -> bool:
        """Whether ``[-c0, c0]`` is robust controlled invariant in this case."""
        case = self.case
        if case == 1:
            return c_d(self) - CASE_TOL <= self.c0 <= self.x_max
        if case == 2:
            return self.d_max - CASE_TOL <= self.c0 <= c_d(self) + CASE_TOL
        return False

    def to_problem(self) -> Problem:
        return problem_from_dict(scalar_problem_dict(
            self.alpha, self.u_max, self.d_max, self.x_max, self.c0))


def c_d(sp: ScalarProblem) -> float:
    """``(d_max - u_max) / (1 - |alpha|)``."""
    return (sp.d_max - sp.u_max) / (1.0 - abs(sp.alpha))


def c_k(sp: ScalarProblem, k: int) -> float:
    """Radius of the ``k``-step backward reachable set of ``[-c0, c0]``.

    Raises:
        NotInvariantSeed: the inputs fall outside both cases or the seed is
            not invariant there.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not sp.seed_is_invariant():
        raise NotInvariantSeed("closed form only covers invariant seeds in cases 1 and 2")
    cd = c_d(sp)
    return min((sp.c0 - cd) / abs(sp.alpha) ** k + cd, sp.x_max)


def hausdorff_to_max(sp: ScalarProblem, k: int) -> float:
    """``(c_d - c0) / |alpha|**k``, the distance from ``C_k`` to ``[-c_d, c_d]``
    in case 2."""
    if sp.case != 2:
        raise WrongCase("distance formula only holds in case 2")
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not sp.seed_is_invariant():
        raise NotInvariantSeed("c0 must lie in [d_max, c_d]")
    return (c_d(sp) - sp.c0) / abs(sp.alpha) ** k
