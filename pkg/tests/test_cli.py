import json

import numpy as np
import pytest

from coolshape import cli
from coolshape.io import read_history_csv

COARSE = ["--set", "geometry.h_target=0.125"]


def run(cmd, out, *extra):
    return cli.main([cmd, *COARSE, "--output", str(out), *extra])


def test_mesh_gen(tmp_path):
    assert run("mesh-gen", tmp_path, "--set", 'output.formats=["json","vtk","msh"]') == cli.EXIT_OK
    info = json.loads((tmp_path / "mesh.json").read_text())
    assert info["min_angle"] > 10
    assert (tmp_path / "mesh.vtk").exists() and (tmp_path / "mesh.msh").exists()


def test_solve_outputs(tmp_path):
    assert run("solve", tmp_path) == cli.EXIT_OK
    c = json.loads((tmp_path / "cost.json").read_text())
    assert (tmp_path / "state.vtk").exists()
    # auto weights normalize the initial terms to 1, 1 and 1e-2
    assert c["J_total"] == pytest.approx(2.01, rel=1e-12)


def test_formats_gate_vtk(tmp_path):
    assert run("solve", tmp_path, "--set", 'output.formats=["json"]') == cli.EXIT_OK
    assert not (tmp_path / "state.vtk").exists() and (tmp_path / "cost.json").exists()


def test_adjoint_and_grad(tmp_path):
    assert run("adjoint", tmp_path) == cli.EXIT_OK
    assert json.loads((tmp_path / "adjoint.json").read_text())["norm_S"] > 0
    assert run("grad", tmp_path) == cli.EXIT_OK
    g = json.loads((tmp_path / "grad.json").read_text())
    assert g["grad_norm"] > 0 and "center_bump" in g["directional"]


def test_taylor(tmp_path):
    assert run("taylor", tmp_path, "--set", "taylor.n=3") == cli.EXIT_OK
    t = json.loads((tmp_path / "taylor.json").read_text())
    assert t["passed"] and t["min_order"] >= 1.95


def test_optimize_history(tmp_path):
    assert run("optimize", tmp_path, "--set", "optimizer.max_iters=4") == cli.EXIT_OK
    rows = read_history_csv(tmp_path / "history.csv")
    assert 1 <= len(rows) <= 4
    totals = [r["J_total"] for r in rows]
    assert all(b < a for a, b in zip(totals, totals[1:]))
    assert (tmp_path / "iter_000.vtk").exists() and (tmp_path / "final.vtk").exists()


def test_optimize_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("optimize", d, "--set", "optimizer.max_iters=2") == cli.EXIT_OK
    assert (a / "history.csv").read_bytes() == (b / "history.csv").read_bytes()
    assert (a / "history.json").read_bytes() == (b / "history.json").read_bytes()


def test_threads_do_not_change_results(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("solve", a, "--threads", "1") == cli.EXIT_OK
    assert run("solve", b, "--threads", "3") == cli.EXIT_OK
    assert (a / "cost.json").read_bytes() == (b / "cost.json").read_bytes()


@pytest.mark.parametrize("extra", [["--set", "physics.mu=-1"], ["--set", "taylor.field=nope"],
                                   ["--set", "nosuchkey=1"], ["--set", 'boundary.u_in=["x+", "0"]'],
                                   ["--set", 'boundary.u_in=["1", "0"]']])
def test_config_errors_exit_1(tmp_path, extra, capsys):
    cmd = "taylor" if "taylor" in extra[1] else "solve"
    assert run(cmd, tmp_path, *extra) == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert cli.main(["solve", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG


def test_inverting_step_exits_2(tmp_path, capsys):
    assert run("taylor", tmp_path, "--set", "taylor.t0=20") == cli.EXIT_SOLVER
    assert "solver error" in capsys.readouterr().err


def test_failed_taylor_exits_3(tmp_path, monkeypatch):
    from coolshape import verify
    real = verify.taylor_test

    def poor(*args, **kw):
        tr = real(*args, **kw)
        tr.orders = [1.0 for _ in tr.orders]
        return tr

    monkeypatch.setattr(verify, "taylor_test", poor)
    assert run("taylor", tmp_path, "--set", "taylor.n=2") == cli.EXIT_VERIFY
    assert json.loads((tmp_path / "taylor.json").read_text())["passed"] is False


def test_verify_quick(tmp_path):
    code = cli.main(["verify", "--output", str(tmp_path), "--set", "verify.quick=true",
                     "--set", "verify.include_config_problem=false"])
    assert code == cli.EXIT_OK
    rep = json.loads((tmp_path / "verify_report.json").read_text())
    assert rep["passed"] is True and rep["checks"]


def test_verify_failure_exits_3(tmp_path, monkeypatch):
    from coolshape import verify
    from coolshape.verify import CheckResult, Report
    monkeypatch.setattr(verify, "run_suite", lambda *a, **k: Report().add(CheckResult("x", 1.0, 0.0, False)))
    assert cli.main(["verify", "--output", str(tmp_path)] + COARSE) == cli.EXIT_VERIFY


def test_bad_command():
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])
