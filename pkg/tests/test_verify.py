import json

import numpy as np
import pytest

from coolshape.mesh import unit_square
from coolshape.transform import AdmissibleField, affine, bump_translation, wall_bump, zero_field
from coolshape.verify import (CheckResult, Report, SizeGuardError, boundary_moving_field, continuity_checks,
                              continuity_sweep, infsup_check, kernel_identity_check, nodal_interpolant,
                              observed_orders, polynomial_wall_field, taylor_test, transport_identity_check)


@pytest.fixture
def pts(rng):
    return rng.uniform(0.15, 0.85, (100, 2))


def test_orders_of_geometric_sequence():
    assert observed_orders([1.0, 0.25, 0.0625]) == pytest.approx([2.0, 2.0])


def test_report_json_roundtrip():
    r = Report().add(CheckResult("a", np.float64(1.0), 2.0, np.bool_(True), {"x": np.arange(2)}),
                     CheckResult("b", float("nan"), 1.0, False))
    d = json.loads(r.to_json())
    assert d["passed"] is False
    assert d["checks"][0]["details"]["x"] == [0, 1]


def test_kernel_check_constant_field(pts):
    res = kernel_identity_check(affine(np.zeros((2, 2)), (0.3, 0.4)), pts)
    assert res.value <= 1e-12 and res.passed


def test_kernel_check_stretch(pts):
    res = kernel_identity_check(affine([[1.0, 0.0], [0.0, 0.0]]), pts)
    assert res.details["A"] <= 1e-6


@pytest.mark.parametrize("V", [bump_translation((0.5, 0.5), 0.4, (1.0, 0.5)), wall_bump(0.2, 0.8, 1.0, 0.5, 0.3),
                               AdmissibleField.from_expression(["x*y*(1-x)", "(x-0.5)**2*y"], name="poly")],
                         ids=lambda V: V.name)
def test_kernel_check_fields(V, pts):
    assert kernel_identity_check(V, pts).passed


def test_transport_zero_field():
    res = transport_identity_check(unit_square(4), "1 + x", zero_field(), 0.3)
    for lhs, rhs in res.values():
        assert lhs == rhs


def test_transport_affine():
    res = transport_identity_check(unit_square(8), "1", affine(np.diag([0.1, 0.2])), 0.5)
    lhs, rhs = res["volume"]
    assert abs(lhs - rhs) <= 1e-10 * rhs
    assert rhs == pytest.approx(np.exp(0.15), rel=1e-10)  # area ratio is xi = exp(t tr M)
    lhs, rhs = res["facet"]
    assert abs(lhs - rhs) <= 1e-10 * rhs


def test_transport_general_field_close():
    res = transport_identity_check(unit_square(16), "1 + x*y", polynomial_wall_field(), 0.2)
    for lhs, rhs in res.values():
        assert abs(lhs - rhs) <= 1e-3 * abs(rhs)


def test_taylor_perimeter():
    sq = unit_square(16)
    tr = taylor_test("perimeter", nodal_interpolant(wall_bump(0.2, 0.8, 1.0, 0.5, 0.3), sq), sq)
    assert tr.min_order >= 1.95


def test_taylor_volume():
    sq = unit_square(16)
    tr = taylor_test("volume", nodal_interpolant(boundary_moving_field(), sq), sq)
    # int div V over the unit square for V = (0.3 x y, 0.5 x^2 y)
    assert tr.dJ == pytest.approx(0.15 + 0.5 / 3, rel=1e-2)
    assert tr.min_order >= 1.95


def test_taylor_zero_field_degenerate():
    sq = unit_square(4)
    tr = taylor_test("volume", zero_field(), sq)
    assert tr.degenerate and all(r == 0 for r in tr.remainders)


def test_taylor_unknown_objective():
    with pytest.raises(ValueError):
        taylor_test("mass", zero_field(), unit_square(2))


def test_infsup_sign_and_control():
    m = unit_square(8)
    assert infsup_check(m) > 0.1
    assert infsup_check(m, "P1v") <= 1e-6


def test_infsup_size_guard():
    with pytest.raises(SizeGuardError):
        infsup_check(unit_square(8), max_dofs=10)


def test_continuity_sweep_properties(demo):
    V = bump_translation((1.0, 0.5), 0.35, (0.3, 1.0))
    sweep = continuity_sweep(demo.mesh, demo.params, demo.data, demo.objective(), V, [0.0, 0.04, 0.02, 0.01])
    assert sweep.dU[0] == 0 and sweep.dP[0] == 0
    for a, b in zip(sweep.dU[1:], sweep.dU[2:]):
        assert 0.8 <= a / b / 2 <= 1.2
    assert all(c.passed for c in continuity_checks(
        continuity_sweep(demo.mesh, demo.params, demo.data, demo.objective(), V, [0.04, 0.02, 0.01])))


def test_continuity_constant_field(demo):
    V = affine(np.zeros((2, 2)), (0.2, -0.1))
    sweep = continuity_sweep(demo.mesh, demo.params, demo.data, demo.objective(), V, [0.1, 0.05])
    assert max(sweep.dU) <= 1e-12 * sweep.normU[0]
    assert max(sweep.dP) <= 1e-12 * sweep.normP[0]
