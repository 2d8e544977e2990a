"""Regenerate the example problem files under problems/."""

import json
from pathlib import Path

from rcis import geom, reach
from rcis.geom import Polytope
from rcis.system import make_problem, problem_to_dict, scalar_problem_dict

ROOT = Path(__file__).resolve().parents[1] / "problems"

A = [[1.1, 1.0], [0.0, 1.0]]
B = [[0.0], [1.0]]
E = [[1.0], [1.0]]


def double_integrator():
    S_x = Polytope.box([-4.0, -2.0], [4.0, 2.0])
    U = Polytope.box([-0.3], [0.3])
    D = Polytope.box([-0.01], [0.01])
    small = make_problem(A, B, E, geom.product(geom.scale(S_x, 0.1), U), D)
    seed = reach.outside_in(small).final
    return make_problem(A, B, E, geom.product(S_x, U), D, seed)


def main():
    ROOT.mkdir(exist_ok=True)
    files = {
        "double_integrator.json": problem_to_dict(double_integrator()),
        "scalar_case1.json": scalar_problem_dict(0.5, 0.1, 0.2, 1.0, 0.3),
        "scalar_case1_stall.json": scalar_problem_dict(0.5, 0.1, 0.2, 1.0, 0.2),
        "scalar_case2.json": scalar_problem_dict(2.0, 0.5, 0.1, 1.0, 0.2),
        "scalar_case2_max.json": Polytope.box([-0.4], [0.4]).to_dict(),
    }
    for name, data in files.items():
        (ROOT / name).write_text(json.dumps(data, indent=1) + "\n")


if __name__ == "__main__":
    main()
