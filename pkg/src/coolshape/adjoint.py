"""Averaged and standard adjoint solves.

The coupling is reversed with respect to the state: the temperature adjoint
``S`` is solved first, then the Stokes adjoint ``(v, q)`` whose load carries
the convective coupling through ``S``.  States enter through their averages
``(U^t + U^0) / 2``, which is the exact value of the integral over the
convex combination because every form is affine along that segment.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import forms
from .expr import VectorExpr, as_vector
from .fem.field import DiscreteField
from .fem.geometry import geometry
from .fem.system import SparseSystem, constrain, solve_sparse
from .state import StateSolution, solve_state, stokes_dirichlet, temperature_dirichlet
from .transform import AdmissibleField, PullBack, pullback


@dataclass(frozen=True)
class ObjectiveParams:
    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 0.0
    Q_des: float = 0.0
    u_des: VectorExpr = field(default_factory=lambda: as_vector(["0", "0"]))

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        object.__setattr__(self, "u_des", as_vector(self.u_des))

    def with_weights(self, lambdas) -> "ObjectiveParams":
        l1, l2, l3 = lambdas
        return ObjectiveParams(l1, l2, l3, self.Q_des, self.u_des)


@dataclass
class AdjointSolution:
    v: DiscreteField
    q: DiscreteField
    S: DiscreteField

    def vector(self) -> np.ndarray:
        return np.concatenate([self.v.coeffs, self.q.coeffs, self.S.coeffs])


@dataclass
class AdjointTemperature:
    """Result of the first adjoint sub-solve; required input of the second."""

    S: DiscreteField
    t: float
    states: tuple = field(repr=False, default=())


def _avg(a: DiscreteField, b: DiscreteField) -> DiscreteField:
    return 0.5 * (a + b)


def _check_pair(U_t: StateSolution, U_0: StateSolution):
    if U_t.mesh is not U_0.mesh and U_t.mesh.n_cells != U_0.mesh.n_cells:
        raise ValueError("both states must live on the same mesh")


def heat_flux_at(T_total: DiscreteField, T_wall, alpha: float, pb: PullBack) -> float:
    fg, wall = forms.wall_facets(pb.mesh, pb.degree)
    T = T_total.facet_values(fg)[wall]
    tw = T_wall(pb.facet.points[wall])
    return float((alpha * (tw - T) * pb.facet.omega[wall] * fg.wds[wall]).sum())


def solve_adjoint_temperature(t: float, U_t: StateSolution, U_0: StateSolution, obj: ObjectiveParams,
                              kernels: Optional[PullBack] = None) -> AdjointTemperature:
    """Averaged adjoint temperature ``S``: transposed ``c`` with load ``g_T``."""
    _check_pair(U_t, U_0)
    mesh = U_0.mesh
    pb = kernels or U_t.kernels or pullback(mesh)
    params, data = U_0.params, U_0.data
    th = forms.taylor_hood(mesh)
    w = _avg(U_t.u_total, U_0.u_total).cell_values(geometry(mesh, pb.degree))
    C_adj = forms.temperature_matrix(th, params.kappa, params.rho_cp, params.alpha, w, pb, adjoint=True)
    Q = heat_flux_at(_avg(U_t.T_total, U_0.T_total), data.T_wall, params.alpha, pb)
    g_T = 2 * obj.lambda1 * (Q - obj.Q_des) * forms.wall_flux_load(th, params.alpha, pb)
    sys_ = constrain(SparseSystem(C_adj, g_T), temperature_dirichlet(th))
    S = np.zeros(th.temperature.dim) if not np.any(sys_.rhs) else solve_sparse(sys_)
    return AdjointTemperature(DiscreteField(th.temperature, S), t, (U_t, U_0))


def velocity_load(t: float, S: DiscreteField, U_t: StateSolution, U_0: StateSolution, obj: ObjectiveParams,
                  pb: PullBack) -> np.ndarray:
    """``g_u``: tracking term on the subdomain plus the convective coupling through ``S``."""
    mesh = U_0.mesh
    th = forms.taylor_hood(mesh)
    geom = geometry(mesh, pb.degree)
    params = U_0.params
    u = _avg(U_t.u_total, U_0.u_total).cell_values(geom)
    gradT = _avg(U_t.T_total, U_0.T_total).cell_gradients(geom)
    Svals = S.cell_values(geom)
    f = -params.rho_cp * np.einsum("cqia,cqa->cqi", pb.cell.B, gradT) * Svals[:, :, None]
    if obj.lambda2 != 0 and np.any(mesh.subdomain):
        sub = mesh.subdomain
        r = u[sub] - obj.u_des(pb.cell.points[sub])
        f[sub] -= 2 * obj.lambda2 * r * pb.cell.xi[sub][:, :, None]
    phi, _ = geom.basis(2)
    local = np.einsum("cqi,ql,cq->cil", f, phi, geom.wdet).reshape(len(f), 12)
    return forms.assemble_vector(forms.vector_cell_dofs(th.velocity), local, th.n_u)


def solve_adjoint_stokes(t: float, S: AdjointTemperature, U_t: StateSolution, U_0: StateSolution,
                         obj: ObjectiveParams, kernels: Optional[PullBack] = None):
    """Averaged adjoint velocity and pressure; needs the temperature adjoint first."""
    if not isinstance(S, AdjointTemperature):
        raise TypeError("solve_adjoint_temperature must run before solve_adjoint_stokes "
                        "(the adjoint coupling is reversed)")
    if S.states and (S.states[0] is not U_t or S.states[1] is not U_0):
        raise ValueError("the temperature adjoint was computed from different states")
    _check_pair(U_t, U_0)
    mesh = U_0.mesh
    pb = kernels or U_t.kernels or pullback(mesh)
    th = forms.taylor_hood(mesh)
    M = forms.stokes_matrix(th, U_0.params.mu, pb)
    rhs = np.concatenate([velocity_load(t, S.S, U_t, U_0, obj, pb), np.zeros(th.n_p)])
    sys_ = constrain(SparseSystem(M, rhs), stokes_dirichlet(th))
    x = np.zeros(th.n_u + th.n_p) if not np.any(sys_.rhs) else solve_sparse(sys_)
    return DiscreteField(th.velocity, x[:th.n_u]), DiscreteField(th.pressure, x[th.n_u:])


def solve_averaged_adjoint(t: float, V: Optional[AdmissibleField], U_0: StateSolution, obj: ObjectiveParams,
                           U_t: Optional[StateSolution] = None) -> AdjointSolution:
    """``P^t`` from ``U^0`` and the transported state ``U^t`` (solved if not given)."""
    if U_t is None:
        U_t = U_0 if (t == 0 or V is None) else solve_state(U_0.mesh, U_0.params, U_0.data, V, t,
                                                            lifts=U_0.liftings)
    pb = U_t.kernels if U_t.kernels is not None else pullback(U_0.mesh, V, t)
    S = solve_adjoint_temperature(t, U_t, U_0, obj, pb)
    v, q = solve_adjoint_stokes(t, S, U_t, U_0, obj, pb)
    return AdjointSolution(v, q, S.S)


def solve_adjoint(U_0: StateSolution, obj: ObjectiveParams) -> AdjointSolution:
    """The usual adjoint: the averaged system at ``t = 0``."""
    pb = pullback(U_0.mesh)
    S = solve_adjoint_temperature(0.0, U_0, U_0, obj, pb)
    v, q = solve_adjoint_stokes(0.0, S, U_0, U_0, obj, pb)
    return AdjointSolution(v, q, S.S)
