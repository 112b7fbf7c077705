"""Executable verification suite: kernel rates, transport identities, Taylor
tests, manufactured solutions, discrete inf-sup and continuity sweeps.

Every check returns :class:`CheckResult` records collected in a
:class:`Report`, which serializes to JSON.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from . import forms
from .adjoint import ObjectiveParams, solve_adjoint, solve_averaged_adjoint
from .expr import as_scalar
from .fem.field import DiscreteField, interpolate
from .fem.geometry import facet_geometry, geometry
from .fem.space import Space
from .fem.system import dirichlet_dofs
from .mesh import BoundaryTag, Mesh, deform, refine, unit_square
from .objective import cost, shape_derivative
from .state import BoundaryData, PhysicalParams, make_liftings, solve_state, temperature_dirichlet
from .transform import (AdmissibleField, NodalField, flow_map, flow_mesh, flow_points, kernel_rates, kernels,
                        pullback)

INLET, OUTLET, WALL = BoundaryTag.INLET, BoundaryTag.OUTLET, BoundaryTag.WALL


class SizeGuardError(ValueError):
    pass


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    details: dict = field(default_factory=dict)


@dataclass
class Report:
    checks: list = field(default_factory=list)

    def add(self, *results: CheckResult) -> "Report":
        self.checks.extend(results)
        return self

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [_jsonable(asdict(c)) for c in self.checks]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def observed_orders(values: Sequence[float], ratio: float = 2.0) -> list:
    v = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return list(np.log(v[:-1] / v[1:]) / np.log(ratio))


# -- kernels ------------------------------------------------------------------

def kernel_identity_check(V: AdmissibleField, points: np.ndarray, normals: Optional[np.ndarray] = None,
                          eps: float = 1e-4, tol: float = 1e-6, name: str = "") -> CheckResult:
    """Central differences of the kernels against their analytic rates."""
    points = np.asarray(points, dtype=float)
    if normals is None:
        ang = np.random.default_rng(1).uniform(0, 2 * np.pi, len(points))
        normals = np.stack([np.cos(ang), np.sin(ang)], 1)
    kp = kernels(flow_map(V, eps), points, normals)
    km = kernels(flow_map(V, -eps), points, normals)
    r = kernel_rates(V, points, normals)
    dev = {
        "xi": float(np.abs((kp.xi - km.xi) / (2 * eps) - r.xi_rate).max()),
        "A": float(np.abs((kp.A - km.A) / (2 * eps) - r.A_rate).max()),
        "B": float(np.abs((kp.B - km.B) / (2 * eps) - r.B_rate).max()),
        "omega": float(np.abs((kp.omega - km.omega) / (2 * eps) - r.omega_rate).max()),
    }
    worst = max(dev.values())
    return CheckResult(f"kernel_identity[{name or V.name}]", worst, tol, worst <= tol, dev)


# -- transport ------------------------------------------------------------------

def transport_identity_check(mesh: Mesh, f, V: AdmissibleField, t: float) -> dict:
    """Integrals over the flowed mesh of ``f o Phi_t^-1`` against ``xi``/``omega``-weighted ones on ``mesh``."""
    f = as_scalar(f)
    pb = pullback(mesh, V, t)
    geom = geometry(mesh)
    fg = facet_geometry(mesh)
    rhs_vol = float((f(geom.points) * pb.cell.xi * geom.wdet).sum())
    rhs_fac = float((f(fg.points) * pb.facet.omega * fg.wds).sum())
    if t == 0:
        return {"volume": (rhs_vol, rhs_vol), "facet": (rhs_fac, rhs_fac)}
    mesh_t = flow_mesh(mesh, V, t)
    inv = flow_map(V, -t)
    gt = geometry(mesh_t)
    ft = facet_geometry(mesh_t)
    lhs_vol = float((f(flow_points(inv, gt.points)) * gt.wdet).sum())
    lhs_fac = float((f(flow_points(inv, ft.points)) * ft.wds).sum())
    return {"volume": (lhs_vol, rhs_vol), "facet": (lhs_fac, rhs_fac)}


def transport_check(mesh: Mesh, f, V: AdmissibleField, t: float, tol: float, name: str = "") -> CheckResult:
    res = transport_identity_check(mesh, f, V, t)
    err = max(abs(a - b) / max(abs(b), 1e-300) for a, b in res.values())
    return CheckResult(f"transport[{name or V.name}]", err, tol, err <= tol, {k: list(v) for k, v in res.items()})


def transport_convergence(mesh: Mesh, f, V: AdmissibleField, t: float, levels: int = 3,
                          min_order: float = 1.8) -> CheckResult:
    errs = []
    m = mesh
    for _ in range(levels):
        res = transport_identity_check(m, f, V, t)
        errs.append(max(abs(a - b) for a, b in res.values()))
        m = refine(m)
    orders = observed_orders(errs)
    o = min(orders)
    return CheckResult(f"transport_order[{V.name}]", o, min_order, o >= min_order,
                       {"errors": errs, "orders": orders})


# -- Taylor tests -------------------------------------------------------------

@dataclass
class TaylorReport:
    objective: str
    ts: list
    remainders: list
    orders: list
    dJ: float
    J0: float
    degenerate: bool = False

    @property
    def min_order(self) -> float:
        return float(min(self.orders)) if self.orders else float("nan")

    def relative_remainder(self) -> float:
        return self.remainders[-1] / abs(self.ts[-1] * self.dJ) if self.dJ else float("inf")


def _geometric(mesh: Mesh, which: str) -> float:
    return mesh.area if which == "volume" else mesh.perimeter


def _geometric_derivative(mesh: Mesh, which: str, V: AdmissibleField) -> float:
    if which == "volume":
        geom = geometry(mesh)
        if isinstance(V, NodalField) and V.field.space.mesh is mesh:
            DV = V.field.cell_gradients(geom)
        else:
            DV = V.jacobian(geom.points)
        return float(((DV[..., 0, 0] + DV[..., 1, 1]) * geom.wdet).sum())
    fg = facet_geometry(mesh)
    if isinstance(V, NodalField) and V.field.space.mesh is mesh:
        DV = V.field.facet_gradients(fg)
    else:
        DV = V.jacobian(fg.points)
    tau = np.stack([-fg.normals[:, 1], fg.normals[:, 0]], 1)
    return float((np.einsum("fa,fqab,fb->fq", tau, DV, tau) * fg.wds).sum())


def nodal_interpolant(V: AdmissibleField, mesh: Mesh, family: str = "P1v") -> NodalField:
    """``V`` interpolated into a vector Lagrange space; its derivative is exact for vertex motion."""
    sp = Space(mesh, family)
    return NodalField(interpolate(lambda p: V(p), sp), f"I_h({V.name})")


def moved_mesh(mesh: Mesh, V: AdmissibleField, t: float) -> Mesh:
    """Nodal P1 fields move vertices linearly; closed-form fields by their RK4 flow."""
    if isinstance(V, NodalField) and V.field.space.degree == 1 and V.field.space.mesh is mesh:
        return deform(mesh, V.vertex_values, t, check_fixed=False)
    return flow_mesh(mesh, V, t)


def taylor_test(objective: str, V: AdmissibleField, mesh: Mesh, t0: float = 1e-2, n: int = 6,
                setup: Optional[tuple] = None) -> TaylorReport:
    """Remainders ``|J(Omega_t) - J(Omega) - t dJ[V]|`` for ``t = t0 / 2^k``.

    ``objective`` is ``perimeter``, ``volume`` or ``full``; the latter needs
    ``setup = (params, data, obj, lifts)`` and carries the liftings with the mesh.
    """
    ts = [t0 / 2 ** k for k in range(n)]
    if objective in ("perimeter", "volume"):
        J0 = _geometric(mesh, objective)
        dJ = _geometric_derivative(mesh, objective, V)
        Js = [_geometric(moved_mesh(mesh, V, t), objective) for t in ts]
    elif objective == "full":
        params, data, obj, lifts = setup
        lifts = lifts or make_liftings(mesh, data)
        U0 = solve_state(mesh, params, data, lifts=lifts)
        J0 = cost(U0, obj).total
        dJ = shape_derivative(U0, solve_adjoint(U0, obj), V, obj)
        Js = []
        for t in ts:
            mt = moved_mesh(mesh, V, t)
            Js.append(cost(solve_state(mt, params, data, lifts=lifts.on(mt)), obj).total)
    else:
        raise ValueError(f"unknown objective {objective!r}")
    rem = [abs(J - J0 - t * dJ) for J, t in zip(Js, ts)]
    degenerate = dJ == 0 and max(rem) == 0
    orders = [] if degenerate else observed_orders(rem)
    return TaylorReport(objective, ts, rem, orders, dJ, J0, degenerate)


def fd_agreement(mesh: Mesh, V: AdmissibleField, params: PhysicalParams, data: BoundaryData,
                 obj: ObjectiveParams, eps: float = 1e-3) -> dict:
    """Shape derivative against ``(J(Omega_eps) - J(Omega_-eps)) / (2 eps)`` with fresh solves."""
    U0 = solve_state(mesh, params, data)
    dJ = shape_derivative(U0, solve_adjoint(U0, obj), V, obj)
    Jp = cost(solve_state(flow_mesh(mesh, V, eps), params, data), obj).total
    Jm = cost(solve_state(flow_mesh(mesh, V, -eps), params, data), obj).total
    fd = (Jp - Jm) / (2 * eps)
    return {"dJ": dJ, "fd": fd, "rel_error": abs(dJ - fd) / abs(fd), "h": mesh.h}


# -- manufactured solutions ---------------------------------------------------

def poiseuille_case(n: int = 4):
    mesh = unit_square(n)
    data = BoundaryData.from_strings(["y*(1-y)", "0"], "0", "0")
    U = solve_state(mesh, PhysicalParams(), data)
    th = forms.taylor_hood(mesh)
    ue = interpolate(["y*(1-y)", "0"], th.velocity)
    pe = interpolate("2*(1-x)", th.pressure)
    return U, float(np.abs(U.u_total.coeffs - ue.coeffs).max()), float(np.abs(U.p0.coeffs - pe.coeffs).max())


def robin_case(n: int = 4):
    mesh = unit_square(n, tags={"bottom": INLET, "top": WALL, "left": OUTLET, "right": OUTLET})
    data = BoundaryData.from_strings(["0", "0"], "0", "2")
    U = solve_state(mesh, PhysicalParams(), data)
    th = forms.taylor_hood(mesh)
    Te = interpolate("y", th.temperature)
    from .objective import heat_flux

    return U, float(np.abs(U.T_total.coeffs - Te.coeffs).max()), heat_flux(U.T_total, data.T_wall, 1.0)


def _l2_against(coarse: DiscreteField, fine: DiscreteField, parent: np.ndarray, grad: bool = False) -> float:
    """L2 distance on the fine mesh, evaluating the coarse field through the parent map."""
    fmesh = fine.space.mesh
    geom = geometry(fmesh)
    pts = geom.points.reshape(-1, 2)
    cells = np.repeat(parent, geom.nq)
    cv = coarse.eval_in_cells(cells, pts).reshape(fine.cell_values(geom).shape)
    diff = cv - fine.cell_values(geom)
    sq = diff ** 2 if diff.ndim == 2 else (diff ** 2).sum(-1)
    return float(np.sqrt((sq * geom.wdet).sum()))


def stokes_convergence(levels: int = 3, n0: int = 4, extra: int = 2) -> dict:
    """L2 errors of the sinusoidal-inlet channel against a nested fine reference."""
    data = BoundaryData.from_strings(["sin(pi*y)", "0"], "0", "0")
    params = PhysicalParams()
    meshes = [unit_square(n0)]
    parents = []
    for _ in range(levels - 1 + extra):
        m, par = refine(meshes[-1], return_parent=True)
        meshes.append(m)
        parents.append(par)
    ref = meshes[-1]
    U_ref = solve_state(ref, params, data)
    eu, ep = [], []
    for k in range(levels):
        U = solve_state(meshes[k], params, data)
        par = np.arange(ref.n_cells)
        for p in reversed(parents[k:]):
            par = p[par]
        eu.append(_l2_against(U.u_total, U_ref.u_total, par))
        ep.append(_l2_against(U.p0, U_ref.p0, par))
    return {"h": [m.h for m in meshes[:levels]], "velocity_errors": eu, "pressure_errors": ep,
            "velocity_orders": observed_orders(eu), "pressure_orders": observed_orders(ep)}


def divergence_norm(U) -> float:
    geom = geometry(U.mesh)
    Du = U.u_total.cell_gradients(geom)
    return float(np.sqrt((((Du[..., 0, 0] + Du[..., 1, 1]) ** 2) * geom.wdet).sum()))


def manufactured_suite(levels: int = 3) -> list:
    out = []
    U, eu, ep = poiseuille_case()
    out.append(CheckResult("stokes_poiseuille", max(eu, ep), 1e-10, max(eu, ep) <= 1e-10,
                           {"velocity_error": eu, "pressure_error": ep}))
    dv = divergence_norm(U)
    out.append(CheckResult("stokes_divergence", dv, 1e-8, dv <= 1e-8))
    _, eT, Q = robin_case()
    out.append(CheckResult("temperature_robin", eT, 1e-10, eT <= 1e-10))
    out.append(CheckResult("temperature_flux", abs(Q - 1.0), 1e-10, abs(Q - 1.0) <= 1e-10, {"Q": Q}))
    conv = stokes_convergence(levels)
    vo, po = min(conv["velocity_orders"]), min(conv["pressure_orders"])
    out.append(CheckResult("stokes_velocity_order", vo, 2.7, vo >= 2.7, conv))
    out.append(CheckResult("stokes_pressure_order", po, 1.9, po >= 1.9, conv))
    return out


# -- inf-sup -------------------------------------------------------------------

def infsup_check(mesh: Mesh, velocity_family: str = "P2v", max_dofs: int = 5000) -> float:
    """Smallest generalized singular value of the divergence coupling.

    Velocity in H1 (zero on inlet and wall), pressure in L2; ``P1v`` as the
    velocity family gives the unstable equal-order pair for debugging.
    """
    vel = Space(mesh, velocity_family)
    pre = Space(mesh, "P1")
    if pre.dim > max_dofs:
        raise SizeGuardError(f"{pre.dim} pressure dofs exceed the dense limit {max_dofs}; use a coarser mesh")
    K = (forms.laplace_matrix(vel) + forms.mass_matrix(vel)).tocsc()
    geom = geometry(mesh)
    phi1, _ = geom.basis(1)
    _, gv = geom.basis(vel.degree)
    nc, nl = geom.n_cells, vel.nloc
    p1 = np.broadcast_to(phi1, (nc,) + phi1.shape)
    local = np.empty((nc, 3, 2 * nl))
    from .fem import backend

    for i in range(2):
        beta = np.zeros(geom.points.shape)
        beta[..., i] = -geom.wdet
        local[:, :, i * nl:(i + 1) * nl] = backend.advection(p1, gv, beta)
    Bd = forms.assemble(mesh, f"infsup{velocity_family}", pre.cell_dofs, local, pre.dim,
                        cols=forms.vector_cell_dofs(vel), m=vel.dim)
    fixed = dirichlet_dofs(vel, [INLET, WALL])[0]
    free = np.setdiff1d(np.arange(vel.dim), fixed)
    Kf = K[free][:, free].tocsc()
    Bf = Bd[:, free]
    X = spla.splu(Kf).solve(Bf.T.toarray())
    S = Bf @ X
    S = 0.5 * (S + S.T)
    Mp = forms.mass_matrix(pre).toarray()
    ev = sla.eigh(S, Mp, eigvals_only=True, subset_by_index=[0, 0])
    return float(np.sqrt(max(ev[0], 0.0)))


def infsup_sweep(mesh: Mesh, refinements: int = 2) -> CheckResult:
    sig = [infsup_check(mesh)]
    m = mesh
    for _ in range(refinements):
        m = refine(m)
        sig.append(infsup_check(m))
    drift = (max(sig) - min(sig)) / max(sig)
    ok = min(sig) > 0 and drift < 0.2
    return CheckResult("infsup_taylor_hood", drift, 0.2, ok, {"sigma": sig})


def infsup_control(mesh: Mesh, tol: float = 1e-6) -> CheckResult:
    """Equal-order P1/P1 must fail the inf-sup test (spurious pressure modes)."""
    sigma = infsup_check(mesh, "P1v")
    return CheckResult("infsup_equal_order_control", sigma, tol, sigma < tol, {})


# -- continuity ------------------------------------------------------------------

@dataclass
class ContinuitySweep:
    ts: list
    dU: list
    dP: list
    normU: list
    normP: list

    def rates(self) -> tuple[list, list]:
        r = [t0 / t1 for t0, t1 in zip(self.ts[:-1], self.ts[1:])]
        def order(v):
            return [math.log(a / b) / math.log(q) if a > 0 and b > 0 else float("nan")
                    for a, b, q in zip(v[:-1], v[1:], r)]
        return order(self.dU), order(self.dP)


def continuity_sweep(mesh: Mesh, params: PhysicalParams, data: BoundaryData, obj: ObjectiveParams,
                     V: AdmissibleField, ts: Sequence[float], bound_ts: Sequence[float] = ()) -> ContinuitySweep:
    """``||U^t - U^0||`` and ``||P^t - P^0||`` on coefficient vectors.

    ``bound_ts`` adds extra times entering only the boundedness norms.
    """
    lifts = make_liftings(mesh, data)
    U0 = solve_state(mesh, params, data, lifts=lifts)
    P0 = solve_averaged_adjoint(0.0, None, U0, obj)
    u0, p0 = U0.vector(), P0.vector()
    dU, dP, nU, nP = [], [], [np.linalg.norm(u0)], [np.linalg.norm(p0)]
    for t in ts:
        Ut = solve_state(mesh, params, data, V, t, lifts=lifts)
        Pt = solve_averaged_adjoint(t, V, U0, obj, U_t=Ut)
        dU.append(float(np.linalg.norm(Ut.vector() - u0)))
        dP.append(float(np.linalg.norm(Pt.vector() - p0)))
        nU.append(float(np.linalg.norm(Ut.vector())))
        nP.append(float(np.linalg.norm(Pt.vector())))
    for t in bound_ts:
        Ut = solve_state(mesh, params, data, V, t, lifts=lifts)
        Pt = solve_averaged_adjoint(t, V, U0, obj, U_t=Ut)
        nU.append(float(np.linalg.norm(Ut.vector())))
        nP.append(float(np.linalg.norm(Pt.vector())))
    return ContinuitySweep(list(ts), dU, dP, nU, nP)


def continuity_checks(sweep: ContinuitySweep, min_rate: float = 0.9) -> list:
    ru, rp = sweep.rates()
    out = []
    for name, d, r in (("state", sweep.dU, ru), ("adjoint", sweep.dP, rp)):
        mono = all(a > b for a, b in zip(d[:-1], d[1:]))
        rate = min(r) if r else float("nan")
        out.append(CheckResult(f"continuity_{name}", rate, min_rate, mono and rate >= min_rate,
                               {"t": sweep.ts, "differences": d, "rates": r}))
    for name, n in (("state", sweep.normU), ("adjoint", sweep.normP)):
        ratio = max(n) / n[0] if n[0] > 0 else float("inf")
        out.append(CheckResult(f"boundedness_{name}", ratio, 2.0, ratio < 2.0, {"norms": n}))
    return out


# -- adjoint identities --------------------------------------------------------

def adjoint_checks(U0, obj: ObjectiveParams) -> list:
    mesh = U0.mesh
    P_std = solve_adjoint(U0, obj)
    P_avg = solve_averaged_adjoint(0.0, None, U0, obj)
    d = float(np.abs(P_std.vector() - P_avg.vector()).max())
    th = forms.taylor_hood(mesh)
    pb = pullback(mesh)
    u = U0.u_total.cell_values(geometry(mesh))
    from .fem.system import SparseSystem, constrain

    prm = U0.params
    fixed = temperature_dirichlet(th)
    z = np.zeros(th.temperature.dim)
    C = constrain(SparseSystem(forms.temperature_matrix(th, prm.kappa, prm.rho_cp, prm.alpha, u, pb), z), fixed)
    Ca = constrain(SparseSystem(forms.temperature_matrix(th, prm.kappa, prm.rho_cp, prm.alpha, u, pb,
                                                         adjoint=True), z), fixed)
    tr = float(np.abs((Ca.matrix - C.matrix.T).toarray()).max()) if th.temperature.dim <= 4000 else \
        float(abs(Ca.matrix - C.matrix.T).max())
    return [CheckResult("adjoint_averaged_equals_standard", d, 1e-10, d <= 1e-10),
            CheckResult("adjoint_transpose", tr, 1e-12, tr <= 1e-12)]


# -- the default suite ---------------------------------------------------------

def polynomial_wall_field() -> AdmissibleField:
    """Lifts the top wall of the unit square; vanishes with its Jacobian on ``x = 0`` and ``x = 1``."""
    return AdmissibleField.from_expression(["0", "4*x**2*(1-x)**2*y"], name="polynomial_wall")


def boundary_moving_field() -> AdmissibleField:
    """Polynomial field with a full-rank Jacobian that moves the boundary.

    A field vanishing on the boundary leaves the area unchanged to all orders
    (the integral of det DV is a boundary term), so it cannot probe volume.
    """
    return AdmissibleField.from_expression(["0.3*x*y", "0.5*x*x*y"], name="boundary_polynomial")


def default_fields():
    from .transform import bump_translation, wall_bump

    return [
        bump_translation((0.5, 0.5), 0.4, (1.0, 0.5)),
        wall_bump(0.2, 0.8, 1.0, 0.5, 0.3),
        AdmissibleField.from_expression(["x*y*(1-x)*sin(pi*y)", "(x-0.5)**2*(1-x)*x*y"], name="polynomial"),
    ]


def run_suite(setup=None, quick: bool = False, log: Optional[Callable[[str], None]] = None) -> Report:
    """The full verification suite on the default problems (and the configured one if given)."""
    from .transform import affine, bump_translation, wall_bump

    report = Report()
    say = log or (lambda s: None)
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.15, 0.85, (100, 2))
    for V in default_fields():
        report.add(kernel_identity_check(V, pts))
    say("kernels done")

    sq = unit_square(8)
    report.add(transport_check(sq, "1", affine(np.diag([0.1, 0.2])), 0.5, 1e-10, "affine"))
    report.add(transport_convergence(sq, "1 + x*y", polynomial_wall_field(), 0.2))
    say("transport done")

    report.add(*manufactured_suite(2 if quick else 3))
    say("manufactured done")

    sq16 = unit_square(16)
    for which, V in (("perimeter", wall_bump(0.2, 0.8, 1.0, 0.5, 0.3)),
                     ("volume", boundary_moving_field())):
        tr = taylor_test(which, nodal_interpolant(V, sq16), sq16)
        report.add(CheckResult(f"taylor_{which}", tr.min_order, 1.95, tr.min_order >= 1.95,
                               {"t": tr.ts, "remainders": tr.remainders, "orders": tr.orders}))
    say("taylor done")

    report.add(infsup_sweep(unit_square(4), 1 if quick else 2))
    report.add(infsup_control(unit_square(8)))
    say("inf-sup done")

    if setup is not None:
        mesh, params, data, obj = setup
        U0 = solve_state(mesh, params, data)
        report.add(*adjoint_checks(U0, obj))
        V = bump_translation(*_interior_bump(mesh))
        sweep = continuity_sweep(mesh, params, data, obj, V, [0.1, 0.05, 0.025, 0.0125])
        report.add(*continuity_checks(sweep))
        say("adjoint and continuity done")
    return report


def _interior_bump(mesh: Mesh):
    """A bump centered in the mesh, clear of inlet and outlet."""
    lo, hi = mesh.vertices.min(0), mesh.vertices.max(0)
    c = 0.5 * (lo + hi)
    r = 0.35 * min(hi - lo)
    return (float(c[0]), float(c[1])), float(r), (0.3, 1.0)
