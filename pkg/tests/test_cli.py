import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from rcis import geom
from rcis.cli import RunReport, main
from rcis.geom import Polytope
from rcis.system import scalar_problem_dict

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"


def write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture(scope="module")
def di_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("di")
    code = main(["inside-out", str(PROBLEMS / "double_integrator.json"), "--out", str(out)])
    return code, out


def test_inside_out_double_integrator(di_run):
    code, out = di_run
    assert code == 0
    rep = RunReport.from_json((out / "inside_out_report.json").read_text())
    assert rep.status == "FixedPoint"
    assert rep.fixed_point_k == 16 and rep.detected_at == 17
    assert rep.k0 == 2
    assert len(list((out / "inside_out").glob("*.csv"))) == 17
    assert len(rep.distances) == 18
    assert rep.fit is not None


def test_vertex_csv_matches_polytope_json(di_run):
    _, out = di_run
    for csv_path in sorted((out / "inside_out").glob("*.csv")):
        V = geom.vertices_from_csv(csv_path.read_text())
        P = Polytope.from_json(csv_path.with_suffix(".json").read_text())
        assert geom.equal_within(geom.from_vertices(V), P, 1e-6)
        x, y = V[:, 0], V[:, 1]
        assert np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) > 0


def test_outside_in_reports_gap(di_run, tmp_path, capsys):
    _, out = di_run
    shutil.copy(out / "inside_out_final.json", tmp_path / "inside_out_final.json")
    code = main(["outside-in", str(PROBLEMS / "double_integrator.json"), "--out", str(tmp_path)])
    assert code == 0
    rep = RunReport.from_json((tmp_path / "outside_in_report.json").read_text())
    assert rep.gap is not None and rep.gap < 1e-6
    outer = Polytope.from_json((tmp_path / "outside_in_final.json").read_text())
    inner = Polytope.from_json((out / "inside_out_final.json").read_text())
    assert geom.contains(outer, inner, tol=1e-7)
    assert "gap" in capsys.readouterr().out


def test_budget_run_with_reference(tmp_path):
    code = main(["inside-out", str(PROBLEMS / "scalar_case2.json"), "--k-max", "10",
                 "--reference", str(PROBLEMS / "scalar_case2_max.json"), "--certificate",
                 "--out", str(tmp_path)])
    assert code == 4
    rep = RunReport.from_json((tmp_path / "inside_out_report.json").read_text())
    assert rep.status == "BudgetExhausted"
    for k, d in rep.distances:
        assert d == pytest.approx(0.2 / 2 ** k, abs=1e-9)
    assert rep.radii[3] == pytest.approx([-0.375, 0.375])
    assert rep.certificate["a"] == pytest.approx(0.5, abs=1e-9)


def test_missing_seed_exit_code(tmp_path, capsys):
    data = scalar_problem_dict(2.0, 0.5, 0.1, 1.0)
    assert main(["inside-out", write(tmp_path / "p.json", data)]) == 3
    assert "seed" in capsys.readouterr().err


def test_non_invariant_seed_exit_code(tmp_path):
    data = scalar_problem_dict(2.0, 0.5, 0.1, 1.0, 0.5)
    assert main(["inside-out", write(tmp_path / "p.json", data)]) == 3


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["inside-out", str(bad)]) == 2
    assert main(["inside-out", str(tmp_path / "missing.json")]) == 2
    assert main(["no-such-command"]) == 2


def test_blowup_exit_code(tmp_path, monkeypatch):
    from rcis import geom as g
    real = g.project
    monkeypatch.setattr(g, "project", lambda P, keep, row_cap=0: real(P, keep, row_cap=1))
    assert main(["outside-in", str(PROBLEMS / "scalar_case2.json")]) == 4


def test_numeric_failure_exit_code(monkeypatch):
    from rcis import reach
    from rcis.errors import NumericFailure

    def boom(*a, **k):
        raise NumericFailure("solver stalled")

    monkeypatch.setattr(reach, "outside_in", boom)
    assert main(["outside-in", str(PROBLEMS / "scalar_case2.json")]) == 5


def test_outside_in_scalar_cases(tmp_path, capsys):
    assert main(["outside-in", str(PROBLEMS / "scalar_case1.json"), "--out", str(tmp_path)]) == 0
    rep = RunReport.from_json((tmp_path / "outside_in_report.json").read_text())
    assert rep.detected_at == 1
    empty = scalar_problem_dict(2.0, 0.0, 0.5, 1.0)
    assert main(["outside-in", write(tmp_path / "e.json", empty), "--out", str(tmp_path)]) == 0
    rep = RunReport.from_json((tmp_path / "outside_in_report.json").read_text())
    assert rep.status == "Empty"


def test_check_command(tmp_path, capsys):
    problem = str(PROBLEMS / "scalar_case2.json")
    c4 = str(PROBLEMS / "scalar_case2_max.json")
    c5 = write(tmp_path / "c5.json", {"H": [[1.0], [-1.0]], "h": [0.5, 0.5]})
    assert main(["check", problem, "--set", c4]) == 0
    assert capsys.readouterr().out.strip() == "invariant"
    assert main(["check", problem, "--set", c5]) == 0
    assert capsys.readouterr().out.strip() == "not invariant"
    assert main(["check", problem, "--set", c4, "--interior", c4]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "gamma* = 1"
    assert lines[2] == "not strictly inside"


def test_oracle1d_command(capsys):
    code = main(["oracle1d", "--alpha", "2", "--u-max", "0.5", "--d-max", "0.1",
                 "--x-max", "1", "--c0", "0.2", "--k-max", "2"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "case 2, c_d = 0.4"
    assert lines[2:] == ["0\t0.2\t0.2", "1\t0.3\t0.1", "2\t0.35\t0.05"]
    assert main(["oracle1d", "--alpha", "0.5", "--u-max", "0.5", "--d-max", "0.1",
                 "--x-max", "1", "--c0", "0.2"]) == 3


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["inside-out", str(PROBLEMS / "scalar_case2.json"), "--k-max", "6", "--certificate"]
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    ra = RunReport.from_json((a / "inside_out_report.json").read_text())
    rb = RunReport.from_json((b / "inside_out_report.json").read_text())
    assert ra.to_json(timings=False) == rb.to_json(timings=False)
    assert ra.timings != {} and "steps" in ra.timings


def test_report_round_trip():
    rep = RunReport(command="inside-out", status="FixedPoint", K=3, fixed_point_k=2, detected_at=3,
                    facets=[2, 2, 2, 2], gammas=[float("inf"), 0.5], k0=2,
                    distances=[[0, 0.1], [1, 0.0]], fit={"c": 1.0, "a": 0.5, "underdetermined": False},
                    timings={"steps": [0.1], "total": 0.1})
    back = RunReport.from_json(rep.to_json())
    assert back == rep
    json.loads(rep.to_json())  # strict JSON, no Infinity literal
    assert "Infinity" not in rep.to_json()
