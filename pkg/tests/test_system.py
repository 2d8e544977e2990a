import json
from pathlib import Path

import numpy as np
import pytest

from rcis import geom
from rcis.errors import (
    DimensionMismatch,
    EmptySet,
    NoStationaryPoint,
    ParseError,
    SeedOutsideSafeSet,
    UnboundedSet,
)
from rcis.geom import Polytope
from rcis.system import (
    STATIONARY_RESIDUAL,
    find_stationary_point,
    load_problem,
    load_problem_file,
    make_problem,
    problem_to_dict,
    recenter,
    scalar_problem_dict,
)

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"


def test_load_double_integrator_file():
    p = load_problem_file(PROBLEMS / "double_integrator.json")
    assert (p.system.n, p.system.m, p.system.l) == (2, 1, 1)
    assert geom.support(p.disturbance, [1.0]) == pytest.approx(0.01)
    assert geom.equal_within(p.state_safe, Polytope.box([-4, -2], [4, 2]), 1e-9)


def test_load_scalar_shorthand():
    text = json.dumps({"alpha": 2.0, "u_max": 0.5, "d_max": 0.1, "x_max": 1.0, "c0": 0.2})
    p = load_problem(text)
    assert (p.system.n, p.system.m, p.system.l) == (1, 1, 1)
    assert geom.interval(p.seed) == pytest.approx((-0.2, 0.2))
    assert geom.interval(p.state_safe) == pytest.approx((-1.0, 1.0))


def _base():
    return scalar_problem_dict(2.0, 0.5, 0.1, 1.0, 0.2)


def test_unbounded_disturbance_rejected():
    d = _base()
    d["disturbance"] = {"H": [[-1.0]], "h": [0.0]}
    with pytest.raises(UnboundedSet):
        load_problem(json.dumps(d))


def test_empty_safe_set_rejected():
    d = _base()
    d["safe"]["h"] = [-1.0, -1.0, 1.0, 1.0]
    with pytest.raises(EmptySet):
        load_problem(json.dumps(d))


def test_seed_outside_safe_set_rejected():
    d = _base()
    d["seed"] = {"H": [[1.0], [-1.0]], "h": [2.0, 2.0]}
    with pytest.raises(SeedOutsideSafeSet):
        load_problem(json.dumps(d))


@pytest.mark.parametrize("mutate, exc", [
    (lambda d: d.pop("A"), ParseError),
    (lambda d: d.__setitem__("safe", [1, 2]), ParseError),
    (lambda d: d.__setitem__("B", [[1.0], [1.0]]), DimensionMismatch),
    (lambda d: d.__setitem__("disturbance", {"H": [[1.0, 0.0]], "h": [1.0]}), DimensionMismatch),
])
def test_malformed_files(mutate, exc):
    d = _base()
    mutate(d)
    with pytest.raises(exc):
        load_problem(json.dumps(d))


def test_invalid_json():
    with pytest.raises(ParseError):
        load_problem("{not json")


def test_problem_dict_round_trip():
    p = load_problem(json.dumps(_base()))
    q = load_problem(json.dumps(problem_to_dict(p)))
    assert np.array_equal(p.system.A, q.system.A)
    assert geom.equal_within(p.safe, q.safe, 0.0)
    assert geom.equal_within(p.seed, q.seed, 0.0)


def _check_stationary(p, s):
    assert s.residual(p.system) <= STATIONARY_RESIDUAL
    assert p.safe.contains_point(np.concatenate([s.x_e, s.u_e]))
    assert p.disturbance.contains_point(s.d_e)
    if p.seed is not None:
        assert p.seed.contains_point(s.x_e)


def test_stationary_point_double_integrator(di_problem):
    s = find_stationary_point(di_problem)
    _check_stationary(di_problem, s)
    assert -0.01 <= s.d_e[0] <= 0.01


def test_stationary_point_symmetric_scalar_is_origin():
    p = load_problem(json.dumps(_base()))
    s = find_stationary_point(p)
    assert np.all(s.x_e == 0) and np.all(s.u_e == 0) and np.all(s.d_e == 0)


def _shifted_scalar():
    safe = geom.product(Polytope.box([-2.0], [2.0]), Polytope.box([-0.5], [0.5]))
    return make_problem([[0.5]], [[1.0]], [[1.0]], safe, Polytope.point([0.0]), Polytope.point([1.0]))


def test_stationary_point_hand_solved():
    p = _shifted_scalar()
    s = find_stationary_point(p)
    assert s.x_e == pytest.approx([1.0], abs=1e-9)
    assert s.u_e == pytest.approx([0.5], abs=1e-9)
    assert s.d_e == pytest.approx([0.0], abs=1e-12)


def test_no_stationary_point():
    safe = geom.product(Polytope.box([-2.0], [2.0]), Polytope.box([-0.1], [0.1]))
    p = make_problem([[0.5]], [[1.0]], [[1.0]], safe, Polytope.point([0.0]), Polytope.point([1.0]))
    with pytest.raises(NoStationaryPoint):
        find_stationary_point(p)


def test_recenter_examples():
    p = load_problem(json.dumps(_base()))
    q = recenter(p, find_stationary_point(p))
    assert geom.equal_within(q.safe, p.safe, 0.0)
    shifted = _shifted_scalar()
    r = recenter(shifted, find_stationary_point(shifted))
    assert geom.vertices(r.seed).ravel() == pytest.approx([0.0], abs=1e-9)
    s2 = find_stationary_point(r)
    assert np.allclose(np.concatenate([s2.x_e, s2.u_e, s2.d_e]), 0.0, atol=1e-9)
    r2 = recenter(r, s2)
    assert geom.equal_within(r2.safe, r.safe, 1e-9)


def test_recenter_shifts_support_values(rng):
    p = _shifted_scalar()
    s = find_stationary_point(p)
    q = recenter(p, s)
    xu = np.concatenate([s.x_e, s.u_e])
    for theta in rng.normal(size=(20, 2)):
        diff = geom.support(q.safe, theta) - geom.support(p.safe, theta)
        assert diff == pytest.approx(-theta @ xu, abs=1e-8)


def test_random_stationary_points(rng):
    for _ in range(20):
        n = int(rng.integers(1, 3))
        A = rng.uniform(-1.2, 1.2, size=(n, n))
        center = rng.uniform(-0.5, 0.5, size=n + 1)
        safe = Polytope.box(center - 1.0, center + 1.0)
        D = Polytope.box([-0.05], [0.05])
        p = make_problem(A, np.ones((n, 1)), rng.normal(size=(n, 1)), safe, D)
        try:
            s = find_stationary_point(p)
        except NoStationaryPoint:
            continue
        _check_stationary(p, s)
