import numpy as np
import pytest

from rcis import geom, reach
from rcis.geom import Polytope
from rcis.oracle1d import ScalarProblem
from rcis.system import make_problem

DI_A = [[1.1, 1.0], [0.0, 1.0]]
DI_B = [[0.0], [1.0]]
DI_E = [[1.0], [1.0]]


def double_integrator_problem(with_seed=True):
    """The 2-D benchmark: unstable double integrator, seed computed as the
    largest invariant set inside a tenth of the state box."""
    S_x = Polytope.box([-4.0, -2.0], [4.0, 2.0])
    U = Polytope.box([-0.3], [0.3])
    D = Polytope.box([-0.01], [0.01])
    full = make_problem(DI_A, DI_B, DI_E, geom.product(S_x, U), D)
    if not with_seed:
        return full
    small = make_problem(DI_A, DI_B, DI_E, geom.product(geom.scale(S_x, 0.1), U), D)
    seed_trace = reach.outside_in(small)
    assert seed_trace.status is reach.TraceStatus.FIXED_POINT
    return full.with_seed(seed_trace.final)


CASE1 = ScalarProblem(alpha=0.5, u_max=0.1, d_max=0.2, x_max=1.0, c0=0.3)
CASE1_STALL = ScalarProblem(alpha=0.5, u_max=0.1, d_max=0.2, x_max=1.0, c0=0.2)
CASE2 = ScalarProblem(alpha=2.0, u_max=0.5, d_max=0.1, x_max=1.0, c0=0.2)


@pytest.fixture(scope="session")
def di_problem():
    return double_integrator_problem()


@pytest.fixture(scope="session")
def di_trace(di_problem):
    return reach.inside_out(di_problem)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def radius(P):
    lo, hi = geom.interval(P)
    assert abs(lo + hi) < 1e-12
    return hi
