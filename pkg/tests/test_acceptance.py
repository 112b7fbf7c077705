"""Acceptance criteria 1-9, each at its stated tolerance and time budget.

Every test records one ``PASS``/``FAIL`` line that is printed in the pytest
terminal summary.
"""
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from coolshape.adjoint import solve_adjoint, solve_averaged_adjoint
from coolshape.config import load_config
from coolshape.mesh import BoundaryTag, quality, refine, unit_square
from coolshape.objective import cost
from coolshape.optimize import optimize
from coolshape.state import solve_state
from coolshape.transform import affine, bump_translation, wall_bump
from coolshape.verify import (adjoint_checks, boundary_moving_field, continuity_checks, continuity_sweep,
                              default_fields, fd_agreement, infsup_check, kernel_identity_check, nodal_interpolant,
                              poiseuille_case, polynomial_wall_field, robin_case, stokes_convergence, taylor_test,
                              transport_check, transport_convergence)

# a bump lifting the top wall between the fins; its directional derivative is O(1)
TOP_WALL_BUMP = bump_translation((1.0, 0.8), 0.4, (0.3, 1.0))


@contextmanager
def criterion(number, title, budget):
    """Time the block, check the budget and record a one-line verdict."""
    info = {}
    t0 = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        dt = time.perf_counter() - t0
        ok = ok and dt < budget
        detail = ", ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}" for k, v in info.items())
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number} {title}: {detail} ({dt:.1f}s / {budget}s)"
        ACCEPTANCE_LINES.append(line)
        print(line)
    assert dt < budget, f"criterion {number} took {dt:.1f}s (budget {budget}s)"


def test_criterion_1_kernel_identities():
    with criterion(1, "kernel identities", 5) as info:
        pts = np.random.default_rng(0).uniform(0.15, 0.85, (100, 2))
        results = [kernel_identity_check(V, pts, tol=1e-6) for V in default_fields()]
        info["fields"] = len(results)
        info["max_dev"] = max(r.value for r in results)
        assert len(results) >= 3
        assert all(r.passed for r in results), [r.details for r in results]


def test_criterion_2_transport():
    with criterion(2, "transport formulas", 30) as info:
        sq = unit_square(8)
        aff = transport_check(sq, "1 + x*y", affine(np.array([[0.1, 0.05], [-0.02, 0.2]])), 0.5, 1e-10)
        conv = transport_convergence(sq, "1 + x*y", polynomial_wall_field(), 0.2, levels=3, min_order=1.8)
        info["affine_rel"] = aff.value
        info["order"] = conv.value
        assert aff.passed and conv.passed


def test_criterion_3_manufactured_stokes():
    with criterion(3, "manufactured Stokes", 60) as info:
        _, eu, ep = poiseuille_case()
        conv = stokes_convergence(3)
        vo, po = min(conv["velocity_orders"]), min(conv["pressure_orders"])
        info.update(poiseuille=max(eu, ep), u_order=vo, p_order=po)
        assert max(eu, ep) <= 1e-10
        assert vo >= 2.7 and po >= 1.9


def test_criterion_4_manufactured_temperature():
    with criterion(4, "manufactured temperature", 10) as info:
        _, eT, Q = robin_case()
        info.update(nodal=eT, flux_err=abs(Q - 1.0))
        assert eT <= 1e-10 and abs(Q - 1.0) <= 1e-10


def test_criterion_5_adjoint_consistency(demo):
    with criterion(5, "adjoint consistency", 30) as info:
        U = demo.state()
        obj = demo.objective()
        avg, tr = adjoint_checks(U, obj)
        # the averaged adjoint built along a nonzero field must also collapse at t = 0
        Pv = solve_averaged_adjoint(0.0, TOP_WALL_BUMP, U, obj)
        d = float(np.abs(Pv.vector() - solve_adjoint(U, obj).vector()).max())
        info.update(averaged=max(avg.value, d), transpose=tr.value)
        assert avg.value <= 1e-10 and d <= 1e-10
        assert tr.value <= 1e-12


def test_criterion_6_shape_derivative():
    with criterion(6, "shape derivative", 300) as info:
        sq = unit_square(16)
        orders = []
        for which, V in (("perimeter", wall_bump(0.2, 0.8, 1.0, 0.5, 0.3)), ("volume", boundary_moving_field())):
            orders.append(taylor_test(which, nodal_interpolant(V, sq), sq).min_order)
        info["taylor_order"] = min(orders)
        errs = []
        for h in (1 / 32, 1 / 64):
            s = load_config(None, [f"geometry.h_target={h}"]).build()
            errs.append(fd_agreement(s.mesh, TOP_WALL_BUMP, s.params, s.data, s.objective())["rel_error"])
        info["fd_rel_h32"], info["fd_rel_h64"] = errs
        assert min(orders) >= 1.95
        assert errs[0] <= 1e-2 and errs[1] < errs[0]


def test_criterion_7_continuity(demo):
    with criterion(7, "continuity sweeps", 120) as info:
        sweep = continuity_sweep(demo.mesh, demo.params, demo.data, demo.objective(), TOP_WALL_BUMP,
                                 [0.1, 0.05, 0.025, 0.0125], bound_ts=[0.075])
        checks = continuity_checks(sweep, min_rate=0.9)
        for c in checks:
            info[c.name] = c.value
        assert all(c.passed for c in checks), [(c.name, c.value) for c in checks]


def test_criterion_8_infsup():
    with criterion(8, "inf-sup", 60) as info:
        m = load_config(None, ["geometry.h_target=0.125"]).build().mesh
        sig = [infsup_check(m)]
        for _ in range(2):
            m = refine(m)
            sig.append(infsup_check(m, max_dofs=20000))
        drift = (max(sig) - min(sig)) / max(sig)
        control = infsup_check(load_config(None, ["geometry.h_target=0.125"]).build().mesh, "P1v")
        info.update(sigma_min=min(sig), drift=drift, p1p1=control)
        assert min(sig) > 0 and drift < 0.2
        assert control <= 1e-6


def test_criterion_9_optimization(demo):
    with criterion(9, "end-to-end optimization", 600) as info:
        cfg = demo.config.optimizer_config()
        assert cfg.max_iters == 10
        hist = optimize(demo.mesh, demo.params, demo.data, demo.objective(), cfg, demo.lifts)
        final = cost(solve_state(hist.mesh, demo.params, demo.data, lifts=demo.lifts.on(hist.mesh)),
                     demo.objective()).total
        totals = hist.totals + [final]
        fixed = demo.mesh.tagged_vertices([BoundaryTag.INLET, BoundaryTag.OUTLET])
        angles = [r.quality.min_angle for r in hist.records] + [quality(hist.mesh).min_angle]
        info.update(iters=len(hist.records), J0=totals[0], J_final=final, min_angle=min(angles))
        assert len(hist.records) == 10
        assert all(b < a for a, b in zip(totals, totals[1:]))
        assert np.array_equal(hist.mesh.vertices[fixed], demo.mesh.vertices[fixed])
        assert min(angles) > cfg.min_angle
