import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coolshape import forms
from coolshape.fem import interpolate
from coolshape.mesh import BoundaryTag, unit_square
from coolshape.objective import heat_flux
from coolshape.state import (BoundaryData, BoundaryDataError, Liftings, PecletWarning, PhysicalParams,
                             StateSolution, make_liftings, solve_state, solve_stokes, solve_temperature,
                             state_residual, temperature_dirichlet, zero_state)
from coolshape.transform import affine, bump_translation, pullback

INLET, OUTLET, WALL = BoundaryTag.INLET, BoundaryTag.OUTLET, BoundaryTag.WALL
ROBIN_TAGS = {"bottom": INLET, "top": WALL, "left": OUTLET, "right": OUTLET}


def test_params_validation():
    with pytest.raises(ValueError):
        PhysicalParams(mu=0.0)
    with pytest.raises(ValueError):
        PhysicalParams(kappa=float("nan"))


def test_inflow_validation():
    m = unit_square(4)
    with pytest.raises(BoundaryDataError):
        BoundaryData.from_strings(["-1", "0"], "0", "0").validate(m)
    with pytest.raises(BoundaryDataError):
        BoundaryData.from_strings(["1", "0"], "0", "0").validate(m)  # nonzero at the wall corners
    BoundaryData.from_strings(["y*(1-y)", "0"], "0", "0").validate(m)


def test_zero_inflow_lifting():
    lifts = make_liftings(unit_square(4), BoundaryData.from_strings(["0", "0"], "0", "1"))
    assert not np.any(lifts.u.coeffs)


def test_lifting_trace():
    m = unit_square(4)
    lifts = make_liftings(m, BoundaryData.from_strings(["y*(1-y)", "0"], "0", "1"))
    sp = lifts.u.space
    s = sp.scalar_boundary_dofs([INLET])
    y = sp.dof_coords[s, 1]
    assert np.abs(lifts.u.coeffs[s] - y * (1 - y)).max() <= 1e-12
    assert np.all(lifts.u.coeffs[sp.n_scalar + s] == 0)


def test_constant_temperature_lifting():
    lifts = make_liftings(unit_square(4), BoundaryData.from_strings(["0", "0"], "300", "300"))
    assert np.abs(lifts.T.coeffs - 300).max() <= 1e-10


def test_poiseuille_exact(poiseuille_square):
    mesh, params, data, U = poiseuille_square
    th = forms.taylor_hood(mesh)
    ue = interpolate(["y*(1-y)", "0"], th.velocity)
    pe = interpolate("2*(1-x)", th.pressure)
    assert np.abs(U.u_total.coeffs - ue.coeffs).max() <= 1e-10
    assert np.abs(U.p_total.coeffs - pe.coeffs).max() <= 1e-10


def test_zero_data_zero_flow():
    m = unit_square(4)
    lifts = make_liftings(m, BoundaryData.from_strings(["0", "0"], "0", "0"))
    u0, p0 = solve_stokes(m, PhysicalParams(), lifts.u)
    assert not np.any(u0.coeffs) and not np.any(p0.coeffs)


def test_constant_field_kernels_change_nothing(poiseuille_square):
    mesh, params, data, U = poiseuille_square
    pb = pullback(mesh, affine(np.zeros((2, 2)), (0.1, 0.2)), 0.3)
    u0, p0 = solve_stokes(mesh, params, U.lift_u, pb)
    assert np.abs(u0.coeffs - U.u0.coeffs).max() <= 1e-12
    assert np.abs(p0.coeffs - U.p0.coeffs).max() <= 1e-12


def test_robin_linear_profile():
    m = unit_square(4, tags=ROBIN_TAGS)
    data = BoundaryData.from_strings(["0", "0"], "0", "2")
    U = solve_state(m, PhysicalParams(), data)
    Te = interpolate("y", forms.taylor_hood(m).temperature)
    assert np.abs(U.T_total.coeffs - Te.coeffs).max() <= 1e-10
    assert heat_flux(U.T_total, data.T_wall, 1.0) == pytest.approx(1.0, abs=1e-10)


@given(st.floats(-5, 5))
@settings(max_examples=10, deadline=None)
def test_uniform_temperature_gives_zero_homogeneous_part(c):
    m = unit_square(3)
    data = BoundaryData.from_strings(["y*(1-y)", "0"], str(c), str(c))
    U = solve_state(m, PhysicalParams(kappa=0.5), data)
    assert np.abs(U.T0.coeffs).max() <= 1e-10 * max(1.0, abs(c))


def test_state_at_zero_time_ignores_field(demo):
    V = bump_translation((1.0, 0.5), 0.35, (0.3, 1.0))
    U0 = demo.state()
    Ut = solve_state(demo.mesh, demo.params, demo.data, V, 0.0, lifts=demo.lifts)
    assert np.array_equal(U0.vector(), Ut.vector())


def test_residuals(demo):
    U = demo.state()
    assert state_residual(U) <= 1e-9
    bumped = StateSolution(U.u0, U.p0, U.T0 * 1.0, U.lift_u, U.lift_T, U.params, U.data, U.kernels)
    free = np.setdiff1d(np.arange(U.T0.space.dim), temperature_dirichlet(forms.taylor_hood(demo.mesh)))
    bumped.T0.coeffs[free[len(free) // 2]] += 1e-3
    assert state_residual(bumped) > state_residual(U)


def test_zero_state_residual_is_rhs():
    m = unit_square(4, tags=ROBIN_TAGS)
    data = BoundaryData.from_strings(["0", "0"], "0", "2")
    Z = zero_state(m, PhysicalParams(), data)
    th = forms.taylor_hood(m)
    load = forms.robin_load(th, 1.0, data.T_wall, pullback(m))
    load[temperature_dirichlet(th)] = 0
    r = state_residual(Z)
    assert r > 0 and r == pytest.approx(np.abs(load).max(), rel=1e-14)


def test_peclet_warning():
    m = unit_square(2)
    data = BoundaryData.from_strings(["40*y*(1-y)", "0"], "0", "1")
    lifts = make_liftings(m, data)
    u0, _ = solve_stokes(m, PhysicalParams(), lifts.u)
    with pytest.warns(PecletWarning):
        solve_temperature(m, PhysicalParams(kappa=0.01), u0 + lifts.u, lifts.T, data.T_wall)


def test_carried_liftings_keep_values(demo):
    lifts = demo.lifts
    moved = lifts.on(demo.mesh.with_vertices(demo.mesh.vertices * 1.0))
    assert isinstance(moved, Liftings)
    assert np.array_equal(moved.u.coeffs, lifts.u.coeffs)
