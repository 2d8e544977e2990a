import itertools
import math

import numpy as np
import pytest

from rcis.errors import EmptySet
from rcis.optim import (
    TOL_FEAS,
    TOL_OBJ,
    TOL_QP,
    LinearProgram,
    LpStatus,
    nearest_point,
    solve_lp,
)

METHODS = ["highs", "dense"]


@pytest.mark.parametrize("method", METHODS)
def test_interval_lp(method):
    lp = LinearProgram([1.0], [[-1.0], [1.0]], [-1.0, 2.0])
    out = solve_lp(lp, method=method)
    assert out.status is LpStatus.OPTIMAL
    assert out.value == pytest.approx(1.0, abs=TOL_OBJ)
    assert out.x == pytest.approx([1.0], abs=TOL_FEAS)


@pytest.mark.parametrize("method", METHODS)
def test_contradictory_bounds_infeasible(method):
    out = solve_lp(LinearProgram([1.0], [[1.0], [-1.0]], [0.0, -1.0]), method=method)
    assert out.status is LpStatus.INFEASIBLE
    assert out.value is None and out.x is None


@pytest.mark.parametrize("method", METHODS)
def test_open_ray_unbounded(method):
    out = solve_lp(LinearProgram([-1.0], [[-1.0]], [0.0]), method=method)
    assert out.status is LpStatus.UNBOUNDED


@pytest.mark.parametrize("method", METHODS)
def test_equality_and_lower_bounds(method):
    # min x + y s.t. x + y = 1, x, y >= 0, x <= 0.3
    lp = LinearProgram([1.0, 2.0], [[1.0, 0.0]], [0.3], A_eq=[[1.0, 1.0]], b_eq=[1.0], lb=[0.0, 0.0])
    out = solve_lp(lp, method=method)
    assert out.value == pytest.approx(0.3 + 2 * 0.7, abs=TOL_OBJ)


def test_rejects_nonfinite_data():
    with pytest.raises(ValueError):
        LinearProgram([np.nan], [[1.0]], [1.0])
    with pytest.raises(ValueError):
        LinearProgram([1.0, 1.0], [[1.0]], [1.0])


def _random_bounded_lp(rng, nvar, ncon):
    A = rng.normal(size=(ncon, nvar))
    x_feas = rng.normal(size=nvar)
    b = A @ x_feas + rng.uniform(0.1, 1.0, size=ncon)
    # box rows keep every objective bounded
    A = np.vstack([A, np.eye(nvar), -np.eye(nvar)])
    b = np.concatenate([b, np.abs(x_feas) + 3, np.abs(x_feas) + 3])
    return LinearProgram(rng.normal(size=nvar), A, b)


def test_dense_matches_highs_on_random_lps(rng):
    for _ in range(60):
        lp = _random_bounded_lp(rng, int(rng.integers(1, 5)), int(rng.integers(1, 8)))
        a = solve_lp(lp, method="highs")
        b = solve_lp(lp, method="dense")
        assert a.status is b.status is LpStatus.OPTIMAL
        assert a.value == pytest.approx(b.value, abs=TOL_OBJ)
        assert lp.max_violation(a.x) <= TOL_FEAS * (1 + np.abs(lp.b).max())
        assert lp.max_violation(b.x) <= TOL_FEAS * (1 + np.abs(lp.b).max())


def test_duality_spot_check(rng):
    # primal: min c.x s.t. A x <= b (x free); dual: max -b.y s.t. A^T y = -c, y >= 0
    for _ in range(30):
        lp = _random_bounded_lp(rng, 3, 5)
        primal = solve_lp(lp)
        dual = solve_lp(LinearProgram(lp.b, np.zeros((0, lp.A.shape[0])), np.zeros(0),
                                      A_eq=lp.A.T, b_eq=-lp.c, lb=np.zeros(lp.A.shape[0])))
        assert primal.value == pytest.approx(-dual.value, abs=TOL_OBJ * 10)


BOX_H = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
BOX_h = np.ones(4)


@pytest.mark.parametrize("v, x, d", [
    ((2.0, 0.0), (1.0, 0.0), 1.0),
    ((0.5, 0.5), (0.5, 0.5), 0.0),
    ((2.0, 2.0), (1.0, 1.0), math.sqrt(2)),
])
def test_nearest_point_box(v, x, d):
    p, dist = nearest_point(BOX_H, BOX_h, v)
    assert p == pytest.approx(x, abs=TOL_QP)
    assert dist == pytest.approx(d, abs=TOL_QP)


def test_nearest_point_inside_returns_input_exactly():
    v = np.array([0.25, -0.75])
    p, dist = nearest_point(BOX_H, BOX_h, v)
    assert dist == 0.0
    assert np.array_equal(p, v)


def test_nearest_point_empty():
    with pytest.raises(EmptySet):
        nearest_point(np.array([[1.0], [-1.0]]), np.array([0.0, -1.0]), [3.0])


def _kkt_brute_force(H, h, v):
    """Try every subset of at most d active rows, keep feasible stationary
    points with nonnegative multipliers, return the closest."""
    d = H.shape[1]
    best = None
    for r in range(0, d + 1):
        for S in itertools.combinations(range(len(h)), r):
            if S:
                M = H[list(S)]
                # x = v - M^T mu, M x = h_S
                try:
                    mu = np.linalg.solve(M @ M.T, M @ v - h[list(S)])
                except np.linalg.LinAlgError:
                    continue
                if np.any(mu < -1e-10):
                    continue
                x = v - M.T @ mu
            else:
                x = v
            if np.all(H @ x <= h + 1e-9):
                dist = np.linalg.norm(x - v)
                if best is None or dist < best[1]:
                    best = (x, dist)
    return best


def test_nearest_point_matches_kkt_oracle(rng):
    for _ in range(60):
        d = int(rng.integers(2, 4))
        H = rng.normal(size=(int(rng.integers(d + 1, 8)), d))
        h = rng.uniform(0.5, 1.5, size=len(H))
        v = rng.normal(scale=3.0, size=d)
        x_ref, d_ref = _kkt_brute_force(H, h, v)
        x, dist = nearest_point(H, h, v)
        assert dist == pytest.approx(d_ref, abs=TOL_QP)
        assert x == pytest.approx(x_ref, abs=1e-6)
        assert (dist == 0.0) == bool(np.all(H @ v <= h + TOL_FEAS))
