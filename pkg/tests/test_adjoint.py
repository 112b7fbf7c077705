import numpy as np
import pytest

from coolshape import forms
from coolshape.adjoint import (AdjointTemperature, ObjectiveParams, solve_adjoint, solve_adjoint_stokes,
                               solve_adjoint_temperature, solve_averaged_adjoint)
from coolshape.config import load_config
from coolshape.fem import geometry
from coolshape.mesh import BoundaryTag, unit_square
from coolshape.objective import cost, heat_flux
from coolshape.state import (BoundaryData, PhysicalParams, StateSolution, solve_state, stokes_dirichlet,
                             temperature_dirichlet)
from coolshape.transform import bump_translation, pullback

INLET, OUTLET, WALL = BoundaryTag.INLET, BoundaryTag.OUTLET, BoundaryTag.WALL


@pytest.fixture(scope="module")
def coarse():
    setup = load_config(None, ["geometry.h_target=0.125"]).build()
    U = setup.state()
    obj = setup.objective()
    return setup, U, obj, solve_adjoint(U, obj)


def _with(U, u0=None, T0=None):
    return StateSolution(U.u0 if u0 is None else u0, U.p0, U.T0 if T0 is None else T0, U.lift_u, U.lift_T,
                         U.params, U.data, U.kernels)


def test_objective_params_reject_negative():
    with pytest.raises(ValueError):
        ObjectiveParams(-1.0, 1.0, 0.0)


def test_no_flux_weight_gives_zero_S(demo):
    U = demo.state()
    obj = demo.objective().with_weights((0.0, 1.0, 0.0))
    assert not np.any(solve_adjoint_temperature(0.0, U, U, obj).S.coeffs)


def test_temperature_block_matches_full_adjoint(demo, demo_solution):
    U, P = demo_solution
    S = solve_adjoint_temperature(0.0, U, U, demo.objective())
    assert np.abs(S.S.coeffs - P.S.coeffs).max() <= 1e-12


def test_matched_flux_target_gives_zero_S():
    m = unit_square(4, tags={"bottom": INLET, "top": WALL, "left": OUTLET, "right": OUTLET})
    data = BoundaryData.from_strings(["0", "0"], "0", "2")
    U = solve_state(m, PhysicalParams(), data)
    obj = ObjectiveParams(1.0, 0.0, 0.0, heat_flux(U.T_total, data.T_wall, 1.0))
    assert np.abs(solve_adjoint_temperature(0.0, U, U, obj).S.coeffs).max() <= 1e-12


def test_zero_loads_give_zero_velocity_adjoint(demo):
    U = demo.state()
    obj = demo.objective().with_weights((0.0, 0.0, 1.0))
    S = solve_adjoint_temperature(0.0, U, U, obj)
    v, q = solve_adjoint_stokes(0.0, S, U, U, obj)
    assert not np.any(v.coeffs) and not np.any(q.coeffs)


def test_exact_tracking_gives_zero_velocity_adjoint(poiseuille_square):
    mesh, params, data, U = poiseuille_square
    sub = unit_square(4, subdomain_box=(0.2, 0.8, 0.2, 0.8))
    U = solve_state(sub, params, data)
    obj = ObjectiveParams(0.0, 1.0, 0.0, 0.0, ["y*(1-y)", "0"])
    S = solve_adjoint_temperature(0.0, U, U, obj)
    v, q = solve_adjoint_stokes(0.0, S, U, U, obj)
    assert not np.any(S.S.coeffs)
    assert np.abs(v.coeffs).max() <= 1e-12 and np.abs(q.coeffs).max() <= 1e-11


def test_velocity_adjoint_conformity(demo_solution):
    U, P = demo_solution
    th = forms.taylor_hood(U.mesh)
    assert np.abs(P.v.coeffs).max() > 0
    assert np.all(P.v.coeffs[stokes_dirichlet(th)] == 0.0)
    assert np.all(P.S.coeffs[temperature_dirichlet(th)] == 0.0)


def test_zero_weights_zero_adjoint(demo):
    U = demo.state()
    P = solve_adjoint(U, demo.objective().with_weights((0.0, 0.0, 0.3)))
    assert not np.any(P.vector())


def test_order_enforced(demo):
    U = demo.state()
    with pytest.raises(TypeError):
        solve_adjoint_stokes(0.0, U.T0, U, U, demo.objective())


def test_mismatched_states_rejected(demo, coarse):
    U = demo.state()
    S = solve_adjoint_temperature(0.0, U, U, demo.objective())
    other = _with(U)
    with pytest.raises(ValueError):
        solve_adjoint_stokes(0.0, S, other, U, demo.objective())
    assert isinstance(S, AdjointTemperature)


def test_averaged_equals_standard_at_zero(demo, demo_solution):
    U, P = demo_solution
    V = bump_translation((1.0, 0.5), 0.35, (0.3, 1.0))
    Pa = solve_averaged_adjoint(0.0, V, U, demo.objective())
    assert np.abs(Pa.vector() - P.vector()).max() <= 1e-10


def test_temperature_consistency(coarse, rng):
    """-dJ/dT . dT equals S . (C dT) for homogeneous perturbations (state-space FD oracle)."""
    setup, U, obj, P = coarse
    th = forms.taylor_hood(setup.mesh)
    dT = rng.normal(size=th.temperature.dim)
    dT[temperature_dirichlet(th)] = 0

    def J(e):
        T = U.T0 * 1.0
        T.coeffs[:] += e * dT
        return cost(_with(U, T0=T), obj).total

    fd = (J(1e-4) - J(-1e-4)) / 2e-4  # J is quadratic in T, so central FD is exact up to roundoff
    pb = pullback(setup.mesh)
    w = U.u_total.cell_values(geometry(setup.mesh, pb.degree))
    C = forms.temperature_matrix(th, U.params.kappa, U.params.rho_cp, U.params.alpha, w, pb)
    assert abs(fd + P.S.coeffs @ (C @ dT)) <= 1e-8 * abs(fd)


def test_velocity_consistency(coarse, rng):
    """Velocity block: the Lagrangian's u-derivative is cancelled by the Stokes adjoint."""
    setup, U, obj, P = coarse
    th = forms.taylor_hood(setup.mesh)
    pb = pullback(setup.mesh)
    geom = geometry(setup.mesh, pb.degree)
    du = rng.normal(size=th.n_u)
    du[stokes_dirichlet(th)] = 0

    def lagrangian_T(e):
        u = U.u0 * 1.0
        u.coeffs[:] += e * du
        Ue = _with(U, u0=u)
        w = Ue.u_total.cell_values(geom)
        C = forms.temperature_matrix(th, U.params.kappa, U.params.rho_cp, U.params.alpha, w, pb)
        r = C @ U.T_total.coeffs - forms.robin_load(th, U.params.alpha, U.data.T_wall, pb)
        return cost(Ue, obj).total + P.S.coeffs @ r

    fd = (lagrangian_T(1e-4) - lagrangian_T(-1e-4)) / 2e-4
    M = forms.stokes_matrix(th, U.params.mu, pb)
    action = P.vector()[:th.n_u + th.n_p] @ (M @ np.concatenate([du, np.zeros(th.n_p)]))
    assert abs(fd + action) <= 1e-8 * abs(fd)


def test_adjoint_transpose_identity(coarse, rng):
    """<C^T S, w> = <S, C w>: the adjoint operator is the exact transpose of the state operator."""
    setup, U, obj, P = coarse
    th = forms.taylor_hood(setup.mesh)
    pb = pullback(setup.mesh)
    w = U.u_total.cell_values(geometry(setup.mesh, pb.degree))
    args = (th, U.params.kappa, U.params.rho_cp, U.params.alpha, w, pb)
    C = forms.temperature_matrix(*args)
    Ct = forms.temperature_matrix(*args, adjoint=True)
    a, b = rng.normal(size=(2, th.temperature.dim))
    ref = b @ (C @ a)
    assert abs(a @ (Ct @ b) - ref) <= 1e-12 * abs(ref)
