"""Kernel-weighted bilinear forms and loads on the reference mesh.

Every form takes a :class:`~coolshape.transform.PullBack`; with identity
kernels they reduce to the plain forms on the mesh itself.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from .fem import backend
from .fem.assembly import Pattern, assemble_vector
from .fem.geometry import facet_geometry, geometry
from .fem.space import Space
from .mesh import BoundaryTag, Mesh
from .transform import PullBack

_PATTERNS: "weakref.WeakKeyDictionary[Mesh, dict]" = weakref.WeakKeyDictionary()
_SPACES: "weakref.WeakKeyDictionary[Mesh, TaylorHood]" = weakref.WeakKeyDictionary()


@dataclass(frozen=True)
class TaylorHood:
    """P2-vector velocity, P1 pressure and P2 temperature on one mesh."""

    velocity: Space
    pressure: Space
    temperature: Space

    @property
    def mesh(self) -> Mesh:
        return self.velocity.mesh

    @property
    def n_u(self) -> int:
        return self.velocity.dim

    @property
    def n_p(self) -> int:
        return self.pressure.dim


def taylor_hood(mesh: Mesh) -> TaylorHood:
    if mesh not in _SPACES:
        _SPACES[mesh] = TaylorHood(Space(mesh, "P2v"), Space(mesh, "P1"), Space(mesh, "P2"))
    return _SPACES[mesh]


def vector_cell_dofs(space: Space) -> np.ndarray:
    cd = space.cell_dofs
    return np.hstack([cd + c * space.n_scalar for c in range(space.ncomp)])


def assemble(mesh: Mesh, key: str, dofs: np.ndarray, local: np.ndarray, n: int,
             cols: np.ndarray | None = None, m: int | None = None) -> sps.csr_matrix:
    """Scatter local matrices with a pattern cached per mesh under ``key``."""
    per = _PATTERNS.setdefault(mesh, {})
    if key not in per:
        per[key] = Pattern(dofs, dofs if cols is None else cols, (n, n if m is None else m))
    return per[key].matrix(local)


def _bcast(phi: np.ndarray, nc: int) -> np.ndarray:
    return np.broadcast_to(phi, (nc,) + phi.shape)


def wall_facets(mesh: Mesh, degree: int):
    fg = facet_geometry(mesh, degree)
    return fg, fg.tags == int(BoundaryTag.WALL)


# -- Stokes ------------------------------------------------------------------

def viscous_local(th: TaylorHood, mu: float, pb: PullBack) -> np.ndarray:
    """Local ``a``: ``mu * sum_i (A grad u_i) . grad v_i`` as (nc, 12, 12)."""
    geom = geometry(th.mesh, pb.degree)
    _, g2 = geom.basis(2)
    k = backend.weighted_stiffness(g2, g2, mu * pb.cell.A, geom.wdet)
    nc = k.shape[0]
    out = np.zeros((nc, 12, 12))
    out[:, :6, :6] = k
    out[:, 6:, 6:] = k
    return out


def divergence_local(th: TaylorHood, pb: PullBack) -> np.ndarray:
    """Local ``b(u, q) = -int q tr(Du B^T)`` as (nc, 3 pressure, 12 velocity)."""
    geom = geometry(th.mesh, pb.degree)
    phi1, _ = geom.basis(1)
    _, g2 = geom.basis(2)
    nc = geom.n_cells
    p1 = _bcast(phi1, nc)
    out = np.empty((nc, 3, 12))
    for i in range(2):
        beta = -pb.cell.B[:, :, i, :] * geom.wdet[:, :, None]
        out[:, :, 6 * i:6 * (i + 1)] = backend.advection(p1, g2, beta)
    return out


def stokes_matrix(th: TaylorHood, mu: float, pb: PullBack) -> sps.csr_matrix:
    """Symmetric saddle matrix ``[[K, Bd^T], [Bd, 0]]`` on (velocity, pressure) dofs."""
    K = viscous_local(th, mu, pb)
    Bd = divergence_local(th, pb)
    nc = K.shape[0]
    local = np.zeros((nc, 15, 15))
    local[:, :12, :12] = K
    local[:, 12:, :12] = Bd
    local[:, :12, 12:] = np.swapaxes(Bd, 1, 2)
    dofs = np.hstack([vector_cell_dofs(th.velocity), th.n_u + th.pressure.cell_dofs])
    return assemble(th.mesh, f"stokes{pb.degree}", dofs, local, th.n_u + th.n_p)


def viscous_matrix(th: TaylorHood, mu: float, pb: PullBack) -> sps.csr_matrix:
    return assemble(th.mesh, f"visc{pb.degree}", vector_cell_dofs(th.velocity), viscous_local(th, mu, pb), th.n_u)


def divergence_matrix(th: TaylorHood, pb: PullBack) -> sps.csr_matrix:
    return assemble(th.mesh, f"div{pb.degree}", th.pressure.cell_dofs, divergence_local(th, pb), th.n_p,
                    cols=vector_cell_dofs(th.velocity), m=th.n_u)


# -- convection-diffusion ---------------------------------------------------

def convection_beta(u_vals: np.ndarray, rho_cp: float, pb: PullBack) -> np.ndarray:
    """Quadrature-weighted advective field ``rho cp B^T u``."""
    geom = geometry(pb.mesh, pb.degree)
    return rho_cp * np.einsum("cqia,cqi->cqa", pb.cell.B, u_vals) * geom.wdet[:, :, None]


def temperature_local(th: TaylorHood, kappa: float, rho_cp: float, alpha: float,
                      u_vals: np.ndarray, pb: PullBack, adjoint: bool = False):
    """Local matrices and dof rows of ``c(u, T, S)`` (cells followed by wall facets).

    ``adjoint`` swaps trial and test in the convection term.
    """
    mesh = th.mesh
    geom = geometry(mesh, pb.degree)
    phi2, g2 = geom.basis(2)
    nc = geom.n_cells
    beta = convection_beta(u_vals, rho_cp, pb)
    if adjoint:
        adv = np.einsum("cqi,cqj->cij", np.einsum("cqa,cqia->cqi", beta, g2), _bcast(phi2, nc))
    else:
        adv = backend.advection(_bcast(phi2, nc), g2, beta)
    cell = backend.weighted_stiffness(g2, g2, kappa * pb.cell.A, geom.wdet) + adv
    fg, wall = wall_facets(mesh, pb.degree)
    fphi, _ = fg.basis(2)
    fw = alpha * pb.facet.omega[wall] * fg.wds[wall]
    robin = backend.weighted_mass(fphi[wall], fphi[wall], fw)
    cd = th.temperature.cell_dofs
    dofs = np.vstack([cd, cd[fg.cell[wall]]])
    return dofs, np.concatenate([cell, robin])


def temperature_matrix(th: TaylorHood, kappa: float, rho_cp: float, alpha: float,
                       u_vals: np.ndarray, pb: PullBack, adjoint: bool = False) -> sps.csr_matrix:
    dofs, local = temperature_local(th, kappa, rho_cp, alpha, u_vals, pb, adjoint)
    return assemble(th.mesh, f"temp{pb.degree}", dofs, local, th.temperature.dim)


def robin_load(th: TaylorHood, alpha: float, T_wall, pb: PullBack) -> np.ndarray:
    """``int_wall alpha (T_wall o Phi_t) S omega``."""
    fg, wall = wall_facets(th.mesh, pb.degree)
    fphi, _ = fg.basis(2)
    tw = T_wall(pb.facet.points[wall])
    vals = np.einsum("fq,fql->fl", alpha * tw * pb.facet.omega[wall] * fg.wds[wall], fphi[wall])
    return assemble_vector(th.temperature.cell_dofs[fg.cell[wall]], vals, th.temperature.dim)


def wall_flux_load(th: TaylorHood, alpha: float, pb: PullBack) -> np.ndarray:
    """``int_wall alpha S omega``: derivative of the flux w.r.t. ``-T``."""
    fg, wall = wall_facets(th.mesh, pb.degree)
    fphi, _ = fg.basis(2)
    vals = np.einsum("fq,fql->fl", alpha * pb.facet.omega[wall] * fg.wds[wall], fphi[wall])
    return assemble_vector(th.temperature.cell_dofs[fg.cell[wall]], vals, th.temperature.dim)


# -- plain matrices for liftings, norms and inner products ------------------

def laplace_matrix(space: Space, degree: int = 4) -> sps.csr_matrix:
    geom = geometry(space.mesh, degree)
    _, g = geom.basis(space.degree)
    eye = np.broadcast_to(np.eye(2), geom.points.shape[:2] + (2, 2))
    k = backend.weighted_stiffness(g, g, eye, geom.wdet)
    if space.ncomp == 1:
        return assemble(space.mesh, f"lap{space.family}{degree}", space.cell_dofs, k, space.dim)
    n = space.nloc
    local = np.zeros((k.shape[0], 2 * n, 2 * n))
    local[:, :n, :n] = k
    local[:, n:, n:] = k
    return assemble(space.mesh, f"lap{space.family}{degree}", vector_cell_dofs(space), local, space.dim)


def mass_matrix(space: Space, degree: int = 4) -> sps.csr_matrix:
    geom = geometry(space.mesh, degree)
    phi, _ = geom.basis(space.degree)
    p = _bcast(phi, geom.n_cells)
    m = backend.weighted_mass(p, p, geom.wdet)
    if space.ncomp == 1:
        return assemble(space.mesh, f"mass{space.family}{degree}", space.cell_dofs, m, space.dim)
    n = space.nloc
    local = np.zeros((m.shape[0], 2 * n, 2 * n))
    local[:, :n, :n] = m
    local[:, n:, n:] = m
    return assemble(space.mesh, f"mass{space.family}{degree}", vector_cell_dofs(space), local, space.dim)


def elasticity_matrix(space: Space, mu_e: float = 1.0, delta: float = 0.1, degree: int = 4) -> sps.csr_matrix:
    """``int 2 mu_e eps(W):eps(Z) + delta W.Z`` on a vector space."""
    if space.ncomp != 2:
        raise ValueError("elasticity needs a vector space")
    geom = geometry(space.mesh, degree)
    phi, g = geom.basis(space.degree)
    nc, n = geom.n_cells, space.nloc
    shape = geom.points.shape[:2] + (2, 2)
    eye = np.broadcast_to(np.eye(2), shape)
    lap = backend.weighted_stiffness(g, g, mu_e * eye, geom.wdet)
    p = _bcast(phi, nc)
    mass = backend.weighted_mass(p, p, geom.wdet)
    local = np.zeros((nc, 2 * n, 2 * n))
    for c in range(2):
        for d in range(2):
            # block (test c, trial d): mu_e (delta_cd grad.grad + d_c phi_j d_d phi_i)
            E = np.zeros((2, 2))
            E[d, c] = 1.0
            blk = backend.weighted_stiffness(g, g, mu_e * np.broadcast_to(E, shape), geom.wdet)
            if c == d:
                blk = blk + lap + delta * mass
            local[:, c * n:(c + 1) * n, d * n:(d + 1) * n] = blk
    return assemble(space.mesh, f"elast{space.family}{degree}", vector_cell_dofs(space), local, space.dim)
