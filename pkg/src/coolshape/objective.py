"""Cost functional, volume-form shape derivative and Riesz descent fields.

The shape derivative is written as

    dJ[V] = sum_cells int G : DV + g . V dx + sum_facets int Gf : DV + gf . V ds

with densities built from the state and adjoint; the same densities give
the derivative along any field and the dual vector on a basis, so both are
consistent to round-off.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import forms
from .adjoint import AdjointSolution, ObjectiveParams, heat_flux_at
from .fem.assembly import assemble_vector
from .fem.field import DiscreteField
from .fem.geometry import DEFAULT_DEGREE, facet_geometry, geometry
from .fem.space import Space
from .fem.system import SparseSystem, constrain, dirichlet_dofs, solve_sparse
from .mesh import BoundaryTag, Mesh
from .state import BoundaryData, Liftings, PhysicalParams, StateSolution, solve_state
from .transform import AdmissibleField, NodalField, PullBack, flow_mesh, pullback


class WeightError(ValueError):
    pass


@dataclass(frozen=True)
class CostBreakdown:
    q_value: float
    term_flux: float
    term_tracking: float
    term_perimeter: float

    @property
    def total(self) -> float:
        return self.term_flux + self.term_tracking + self.term_perimeter

    def as_dict(self) -> dict:
        return {"Q": self.q_value, "J_flux": self.term_flux, "J_tracking": self.term_tracking,
                "J_perimeter": self.term_perimeter, "J_total": self.total}


def heat_flux(T_total: DiscreteField, T_wall, alpha: float, kernels: Optional[PullBack] = None) -> float:
    """``Q(t, T) = int_wall alpha (T_wall o Phi_t - T) omega ds``."""
    pb = kernels or pullback(T_total.space.mesh)
    return heat_flux_at(T_total, T_wall, alpha, pb)


def tracking_integral(u_total: DiscreteField, u_des, kernels: Optional[PullBack] = None) -> float:
    """``int_sub |u - u_des o Phi_t|^2 xi dx``."""
    mesh = u_total.space.mesh
    pb = kernels or pullback(mesh)
    sub = mesh.subdomain
    if not np.any(sub):
        return 0.0
    geom = geometry(mesh, pb.degree)
    r = u_total.cell_values(geom)[sub] - u_des(pb.cell.points[sub])
    return float(((r ** 2).sum(-1) * pb.cell.xi[sub] * geom.wdet[sub]).sum())


def boundary_measure(mesh: Mesh, kernels: Optional[PullBack] = None) -> float:
    pb = kernels or pullback(mesh)
    fg = facet_geometry(mesh, pb.degree)
    return float((pb.facet.omega * fg.wds).sum())


def cost(U: StateSolution, obj: ObjectiveParams, kernels: Optional[PullBack] = None) -> CostBreakdown:
    """``J`` (pulled back with the kernels ``U`` was solved with, unless given)."""
    pb = kernels or U.kernels or pullback(U.mesh)
    Q = heat_flux(U.T_total, U.data.T_wall, U.params.alpha, pb)
    track = tracking_integral(U.u_total, obj.u_des, pb) if obj.lambda2 else 0.0
    per = boundary_measure(U.mesh, pb) if obj.lambda3 else 0.0
    return CostBreakdown(Q, obj.lambda1 * (Q - obj.Q_des) ** 2, obj.lambda2 * track, obj.lambda3 * per)


def normalization_weights(mesh0: Mesh, U0: StateSolution, Q_des: float, u_des) -> tuple[float, float, float]:
    """Weights scaling each term of ``J`` to order one on the initial shape."""
    from .expr import as_vector

    Q0 = heat_flux(U0.T_total, U0.data.T_wall, U0.params.alpha)
    track0 = tracking_integral(U0.u_total, as_vector(u_des))
    if Q0 == Q_des:
        raise WeightError("Q on the initial shape equals Q_des; give lambda1 explicitly")
    if track0 == 0:
        raise WeightError("velocity tracking vanishes on the initial shape; give lambda2 explicitly")
    return (Q0 - Q_des) ** -2, 1.0 / track0, 1e-2 / mesh0.perimeter


def pullback_consistency(mesh: Mesh, V: AdmissibleField, t: float, params: PhysicalParams, data: BoundaryData,
                         obj: ObjectiveParams, lifts: Optional[Liftings] = None) -> tuple[float, float]:
    """``J`` on the flowed mesh versus ``j(t, U^t)`` on the reference mesh.

    The deformed solve uses the transported liftings (nodal values carried
    with the vertices), i.e. the transported boundary data.
    """
    from .state import make_liftings

    lifts = lifts or make_liftings(mesh, data)
    U_t = solve_state(mesh, params, data, V, t, lifts=lifts)
    j = cost(U_t, obj).total
    if t == 0:
        return j, j
    mesh_t = flow_mesh(mesh, V, t)
    U_d = solve_state(mesh_t, params, data, lifts=lifts.on(mesh_t))
    return cost(U_d, obj).total, j


# -- shape derivative ------------------------------------------------------

@dataclass
class Densities:
    cell_G: np.ndarray   # (nc, nq, 2, 2)
    cell_g: np.ndarray   # (nc, nq, 2)
    facet_G: np.ndarray  # (nb, nqf, 2, 2)
    facet_g: np.ndarray  # (nb, nqf, 2)
    degree: int


def _sym(M):
    return M + np.swapaxes(M, -1, -2)


def densities(U0: StateSolution, P0: AdjointSolution, obj: ObjectiveParams,
              degree: int = DEFAULT_DEGREE) -> Densities:
    mesh = U0.mesh
    prm = U0.params
    geom = geometry(mesh, degree)
    fg = facet_geometry(mesh, degree)
    eye = np.eye(2)

    u = U0.u_total
    Du = u.cell_gradients(geom)
    Dv = P0.v.cell_gradients(geom)
    p = U0.p0.cell_values(geom)
    q = P0.q.cell_values(geom)
    gT = U0.T_total.cell_gradients(geom)
    gS = P0.S.cell_gradients(geom)
    S = P0.S.cell_values(geom)
    uv = u.cell_values(geom)

    def scal(a):
        return a[..., None, None] * eye

    tr_u = Du[..., 0, 0] + Du[..., 1, 1]
    tr_v = Dv[..., 0, 0] + Dv[..., 1, 1]
    G = prm.mu * (scal(np.einsum("cqij,cqij->cq", Du, Dv)) - _sym(np.einsum("cqia,cqib->cqab", Du, Dv)))
    G -= p[..., None, None] * (scal(tr_v) - np.swapaxes(Dv, -1, -2))
    G -= q[..., None, None] * (scal(tr_u) - np.swapaxes(Du, -1, -2))
    G += prm.kappa * (scal(np.einsum("cqa,cqa->cq", gT, gS)) - _sym(np.einsum("cqa,cqb->cqab", gT, gS)))
    G += prm.rho_cp * S[..., None, None] * (scal(np.einsum("cqa,cqa->cq", uv, gT))
                                             - np.einsum("cqa,cqb->cqab", gT, uv))
    g = np.zeros(geom.points.shape)
    sub = mesh.subdomain
    if obj.lambda2 and np.any(sub):
        pts = geom.points[sub]
        r = uv[sub] - obj.u_des(pts)
        G[sub] += obj.lambda2 * scal((r ** 2).sum(-1))
        g[sub] -= 2 * obj.lambda2 * np.einsum("cqia,cqi->cqa", obj.u_des.jacobian(pts), r)

    n = fg.normals
    proj = np.broadcast_to(eye - np.einsum("fa,fb->fab", n, n)[:, None], fg.points.shape + (2,))
    Gf = obj.lambda3 * proj.copy()
    gf = np.zeros(fg.points.shape)
    wall = fg.tags == int(BoundaryTag.WALL)
    if np.any(wall):
        pb0 = pullback(mesh, degree=degree)
        Q = heat_flux_at(U0.T_total, U0.data.T_wall, prm.alpha, pb0)
        c1 = 2 * obj.lambda1 * (Q - obj.Q_des)
        pts = fg.points[wall]
        Tw = U0.data.T_wall(pts)
        gTw = U0.data.T_wall.gradient(pts)
        T = U0.T_total.facet_values(fg)[wall]
        Sf = P0.S.facet_values(fg)[wall]
        a = prm.alpha
        Gf[wall] += ((c1 * a * (Tw - T) + a * (T - Tw) * Sf)[..., None, None]) * proj[wall]
        gf[wall] += ((c1 * a - a * Sf)[..., None]) * gTw
    return Densities(G, g, Gf, gf, degree)


def _field_data(V: AdmissibleField, mesh: Mesh, degree: int):
    geom = geometry(mesh, degree)
    fg = facet_geometry(mesh, degree)
    if isinstance(V, NodalField) and V.field.space.mesh is mesh:
        f = V.field
        return f.cell_values(geom), f.cell_gradients(geom), f.facet_values(fg), f.facet_gradients(fg)
    return V(geom.points), V.jacobian(geom.points), V(fg.points), V.jacobian(fg.points)


def evaluate_derivative(dens: Densities, mesh: Mesh, V: AdmissibleField, parts: bool = False):
    geom = geometry(mesh, dens.degree)
    fg = facet_geometry(mesh, dens.degree)
    Vc, DVc, Vf, DVf = _field_data(V, mesh, dens.degree)
    cell = (np.einsum("cqab,cqab->cq", dens.cell_G, DVc) + np.einsum("cqa,cqa->cq", dens.cell_g, Vc)) * geom.wdet
    facet = (np.einsum("fqab,fqab->fq", dens.facet_G, DVf) + np.einsum("fqa,fqa->fq", dens.facet_g, Vf)) * fg.wds
    if parts:
        return float(cell.sum()), float(facet.sum())
    return float(cell.sum() + facet.sum())


def shape_derivative(U0: StateSolution, P0: AdjointSolution, V: AdmissibleField, obj: ObjectiveParams,
                     degree: int = DEFAULT_DEGREE) -> float:
    """``dJ(Omega)[V]`` in volume form from the state and adjoint at ``t = 0``."""
    return evaluate_derivative(densities(U0, P0, obj, degree), U0.mesh, V)


def dual_vector(dens: Densities, space: Space) -> np.ndarray:
    """``dJ[phi_k e_c]`` for every basis field of a vector space (component-blocked)."""
    mesh = space.mesh
    geom = geometry(mesh, dens.degree)
    fg = facet_geometry(mesh, dens.degree)
    phi, grads = geom.basis(space.degree)
    cell = (np.einsum("cqab,cqlb->cal", dens.cell_G * geom.wdet[..., None, None], grads)
            + np.einsum("cqa,ql->cal", dens.cell_g * geom.wdet[..., None], phi))
    fphi, fgrads = fg.basis(space.degree)
    facet = (np.einsum("fqab,fqlb->fal", dens.facet_G * fg.wds[..., None, None], fgrads)
             + np.einsum("fqa,fql->fal", dens.facet_g * fg.wds[..., None], fphi))
    cd = space.cell_dofs
    n = space.n_scalar
    out = np.zeros(space.dim)
    for c in range(2):
        out[c * n:(c + 1) * n] = (assemble_vector(cd, cell[:, c], n)
                                  + assemble_vector(cd[fg.cell], facet[:, c], n))
    return out


@dataclass
class ShapeGradient:
    dual: np.ndarray
    riesz: DiscreteField
    space: Space
    mu_e: float
    delta: float

    @property
    def norm(self) -> float:
        """``sqrt(-<dual, W>)``: the dual norm of ``dJ`` in the Riesz inner product."""
        return float(np.sqrt(max(-self.dual @ self.riesz.coeffs, 0.0)))

    @property
    def field(self) -> NodalField:
        return NodalField(self.riesz, "riesz")

    def vertex_displacement(self) -> np.ndarray:
        return self.field.vertex_values


def fixed_dofs(space: Space) -> np.ndarray:
    return dirichlet_dofs(space, [BoundaryTag.INLET, BoundaryTag.OUTLET])[0]


def assemble_shape_gradient(U0: StateSolution, P0: AdjointSolution, obj: ObjectiveParams,
                            field_space: str = "P1v", mu_e: float = 1.0, delta: float = 0.1,
                            degree: int = DEFAULT_DEGREE) -> ShapeGradient:
    """Dual vector on ``field_space`` and its Riesz representative (elasticity inner product)."""
    space = Space(U0.mesh, field_space)
    if space.ncomp != 2:
        raise ValueError("the gradient space must be vector valued")
    dual = dual_vector(densities(U0, P0, obj, degree), space)
    fixed = fixed_dofs(space)
    dual[fixed] = 0.0
    E = forms.elasticity_matrix(space, mu_e, delta)
    sys_ = constrain(SparseSystem(E, -dual), fixed)
    W = np.zeros(space.dim) if not np.any(sys_.rhs) else solve_sparse(sys_)
    return ShapeGradient(dual, DiscreteField(space, W), space, mu_e, delta)
