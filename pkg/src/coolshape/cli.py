"""``coolshape`` command-line interface.

Usage: ``coolshape COMMAND [CONFIG.json] [--set key=value ...] [--threads N] [--output DIR]``

Exit codes: 0 success, 1 configuration error, 2 solver error,
3 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .adjoint import solve_adjoint
from .config import ConfigError, RunConfig, load_config
from .expr import ExpressionError
from .fem import set_threads
from .fem.system import SolverError
from .mesh import InversionError, MeshError, quality, write_msh
from .objective import WeightError, assemble_shape_gradient, cost, shape_derivative
from .optimize import optimize
from .state import BoundaryDataError
from .transform import DeformationTooLarge

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3
COMMANDS = ("mesh-gen", "solve", "adjoint", "grad", "taylor", "verify", "optimize")

log = logging.getLogger("coolshape")

_CONFIG_ERRORS = (ConfigError, ExpressionError, BoundaryDataError, WeightError, MeshError)
_SOLVER_ERRORS = (SolverError, InversionError, DeformationTooLarge, np.linalg.LinAlgError, FloatingPointError)


class VerificationFailed(Exception):
    pass


def _wants(cfg: RunConfig, fmt: str) -> bool:
    return fmt in cfg["output"]["formats"]


def _mesh_summary(mesh) -> dict:
    q = quality(mesh)
    return {"n_vertices": mesh.n_vertices, "n_cells": mesh.n_cells, "area": mesh.area,
            "perimeter": mesh.perimeter, "h": mesh.h, "min_angle": q.min_angle,
            "subdomain_cells": int(mesh.subdomain.sum())}


def _state_fields(U) -> dict:
    return {"u": io.vertex_values(U.u_total), "p": io.vertex_values(U.p_total), "T": io.vertex_values(U.T_total)}


def cmd_mesh_gen(cfg, setup, out: Path) -> dict:
    if _wants(cfg, "vtk"):
        io.write_vtk(out / "mesh.vtk", setup.mesh)
    if _wants(cfg, "msh"):
        write_msh(setup.mesh, out / "mesh.msh")
    summary = _mesh_summary(setup.mesh)
    io.write_json(out / "mesh.json", summary)
    return summary


def _weights(obj) -> list:
    return [obj.lambda1, obj.lambda2, obj.lambda3]


def cmd_solve(cfg, setup, out: Path) -> dict:
    U = setup.state()
    obj = setup.objective()
    c = cost(U, obj)
    if _wants(cfg, "vtk"):
        io.write_vtk(out / "state.vtk", setup.mesh, _state_fields(U))
    result = {**c.as_dict(), "J_total": c.total, "weights": _weights(obj)}
    io.write_json(out / "cost.json", result)
    return result


def cmd_adjoint(cfg, setup, out: Path) -> dict:
    U = setup.state()
    P = solve_adjoint(U, setup.objective())
    if _wants(cfg, "vtk"):
        io.write_vtk(out / "adjoint.vtk", setup.mesh,
                     {"v": io.vertex_values(P.v), "q": io.vertex_values(P.q), "S": io.vertex_values(P.S)})
    result = {"norm_v": float(np.linalg.norm(P.v.coeffs)), "norm_q": float(np.linalg.norm(P.q.coeffs)),
              "norm_S": float(np.linalg.norm(P.S.coeffs))}
    io.write_json(out / "adjoint.json", result)
    return result


def cmd_grad(cfg, setup, out: Path) -> dict:
    U = setup.state()
    obj = setup.objective()
    P = solve_adjoint(U, obj)
    oc = cfg.optimizer_config()
    g = assemble_shape_gradient(U, P, obj, oc.field_space, oc.mu_e, oc.delta)
    if _wants(cfg, "vtk"):
        io.write_vtk(out / "gradient.vtk", setup.mesh, {"descent": g.vertex_displacement()})
    directional = {name: shape_derivative(U, P, cfg.field(name), obj) for name in sorted(cfg["fields"])}
    result = {"grad_norm": g.norm, "field_space": oc.field_space, "directional": directional}
    io.write_json(out / "grad.json", result)
    return result


def cmd_taylor(cfg, setup, out: Path) -> dict:
    from .verify import nodal_interpolant, taylor_test

    tc = cfg["taylor"]
    V = nodal_interpolant(cfg.field(tc["field"]), setup.mesh)
    extra = None
    if tc["objective"] == "full":
        extra = (setup.params, setup.data, setup.objective(), setup.lifts)
    tr = taylor_test(tc["objective"], V, setup.mesh, tc["t0"], tc["n"], extra)
    threshold = 1.95
    passed = tr.degenerate or tr.min_order >= threshold
    result = {"objective": tr.objective, "field": tc["field"], "t": tr.ts, "remainders": tr.remainders,
              "orders": tr.orders, "dJ": tr.dJ, "J0": tr.J0, "min_order": tr.min_order,
              "threshold": threshold, "passed": passed}
    io.write_json(out / "taylor.json", result)
    if not passed:
        raise VerificationFailed(f"Taylor order {tr.min_order:.3f} below {threshold}")
    return result


def cmd_verify(cfg, setup, out: Path) -> dict:
    from .verify import run_suite

    vc = cfg["verify"]
    problem = None
    if vc["include_config_problem"]:
        problem = (setup.mesh, setup.params, setup.data, setup.objective())
    report = run_suite(problem, quick=vc["quick"], log=log.info)
    io.write_json(out / "verify_report.json", report.to_dict())
    summary = {c.name: bool(c.passed) for c in report.checks}
    if not report.passed:
        failed = [k for k, v in summary.items() if not v]
        raise VerificationFailed(f"failed checks: {', '.join(failed)}")
    return {"passed": True, "checks": len(report.checks)}


def cmd_optimize(cfg, setup, out: Path) -> dict:
    every = cfg["optimizer"]["snapshot_every"]
    vtk = _wants(cfg, "vtk")

    def snapshot(it, mesh, U, record):
        if vtk and every and it % every == 0:
            io.write_vtk(out / f"iter_{it:03d}.vtk", mesh, _state_fields(U))

    obj = setup.objective()
    hist = optimize(setup.mesh, setup.params, setup.data, obj, cfg.optimizer_config(), setup.lifts, snapshot)
    rows = hist.rows()
    io.write_history_csv(out / "history.csv", rows)
    if vtk:
        io.write_vtk(out / "final.vtk", hist.mesh)
    if _wants(cfg, "msh"):
        write_msh(hist.mesh, out / "final.msh")
    result = {"status": hist.status, "iterations": len(rows), "weights": _weights(obj), "history": rows,
              "final_mesh": _mesh_summary(hist.mesh)}
    io.write_json(out / "history.json", result)
    return {"status": hist.status, "iterations": len(rows),
            "J_first": rows[0]["J_total"] if rows else None, "J_last": rows[-1]["J_total"] if rows else None}


HANDLERS = {"mesh-gen": cmd_mesh_gen, "solve": cmd_solve, "adjoint": cmd_adjoint, "grad": cmd_grad,
            "taylor": cmd_taylor, "verify": cmd_verify, "optimize": cmd_optimize}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coolshape", description="Shape optimization of a 2D microchannel cooler.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("config", nargs="?", help="JSON run configuration (defaults to the channel demo)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. optimizer.max_iters=5 (repeatable)")
    p.add_argument("--threads", type=int, default=None, help="assembly threads (default: config, else 1)")
    p.add_argument("--output", default=None, help="output directory (overrides output.directory)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = list(args.overrides)
        if args.output is not None:
            overrides.append(f"output.directory={args.output}")
        if args.threads is not None:
            overrides.append(f"threads={args.threads}")
        cfg = load_config(args.config, overrides)
        set_threads(cfg["threads"])
        setup = cfg.build()
        if args.command not in ("mesh-gen", "verify"):
            setup.data.validate(setup.mesh)
        if args.command == "taylor":
            cfg.field(cfg["taylor"]["field"])
    except (*_CONFIG_ERRORS, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    try:
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore")
            result = HANDLERS[args.command](cfg, setup, out)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except _SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"{args.command}: ok ({out})")
    for k, v in result.items():
        if not isinstance(v, (dict, list)):
            print(f"  {k}: {v}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
