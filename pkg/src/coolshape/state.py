"""One-way coupled state solves: Stokes first, then convection-diffusion."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import forms
from .expr import ScalarExpr, VectorExpr, as_scalar, as_vector
from .fem.field import DiscreteField
from .fem.geometry import DEFAULT_DEGREE, facet_geometry, geometry
from .fem.system import SparseSystem, constrain, dirichlet_dofs, solve_sparse
from .mesh import BoundaryTag, Mesh
from .transform import AdmissibleField, PullBack, pullback

INLET, OUTLET, WALL = BoundaryTag.INLET, BoundaryTag.OUTLET, BoundaryTag.WALL


class PecletWarning(UserWarning):
    pass


class CoercivityWarning(UserWarning):
    pass


class BoundaryDataError(ValueError):
    pass


@dataclass(frozen=True)
class PhysicalParams:
    mu: float = 1.0
    kappa: float = 1.0
    rho: float = 1.0
    cp: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        for name in ("mu", "kappa", "rho", "cp", "alpha"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"physical parameter {name} must be positive, got {v}")

    @property
    def rho_cp(self) -> float:
        return self.rho * self.cp


@dataclass(frozen=True)
class BoundaryData:
    """Inlet velocity, inlet temperature and wall temperature expressions."""

    u_in: VectorExpr
    T_in: ScalarExpr
    T_wall: ScalarExpr

    @classmethod
    def from_strings(cls, u_in, T_in, T_wall) -> "BoundaryData":
        return cls(as_vector(u_in), as_scalar(T_in), as_scalar(T_wall))

    def validate(self, mesh: Mesh, tol: float = 1e-12) -> None:
        fg = facet_geometry(mesh)
        inlet = fg.tags == int(INLET)
        u = self.u_in(fg.points[inlet])
        flux = np.einsum("fqa,fa->fq", u, fg.normals[inlet])
        if flux.size and flux.max() > tol:
            raise BoundaryDataError(f"u_in points out of the inlet (max u.n = {flux.max():.3g})")
        wall = fg.tags == int(WALL)
        uw = self.u_in(fg.points[wall])
        if uw.size and np.abs(uw).max() > tol:
            raise BoundaryDataError(f"u_in does not vanish on the wall (max |u| = {np.abs(uw).max():.3g})")


@dataclass
class Liftings:
    u: DiscreteField
    T: DiscreteField

    def on(self, mesh: Mesh) -> "Liftings":
        """Carry the nodal values to a mesh with the same topology."""
        th = forms.taylor_hood(mesh)
        return Liftings(DiscreteField(th.velocity, self.u.coeffs), DiscreteField(th.temperature, self.T.coeffs))


@dataclass
class StateSolution:
    u0: DiscreteField
    p0: DiscreteField
    T0: DiscreteField
    lift_u: DiscreteField
    lift_T: DiscreteField
    params: Optional[PhysicalParams] = None
    data: Optional[BoundaryData] = None
    kernels: Optional[PullBack] = field(default=None, repr=False)

    @property
    def mesh(self) -> Mesh:
        return self.u0.space.mesh

    @property
    def u_total(self) -> DiscreteField:
        return self.u0 + self.lift_u

    @property
    def T_total(self) -> DiscreteField:
        return self.T0 + self.lift_T

    @property
    def p_total(self) -> DiscreteField:
        return self.p0

    def vector(self) -> np.ndarray:
        """Stacked homogeneous coefficients (u0, p0, T0)."""
        return np.concatenate([self.u0.coeffs, self.p0.coeffs, self.T0.coeffs])

    @property
    def liftings(self) -> Liftings:
        return Liftings(self.lift_u, self.lift_T)


def _laplace_extension(space, tags_values) -> np.ndarray:
    A = forms.laplace_matrix(space)
    dofs, vals = [], []
    for tag, value in tags_values:
        d, v = dirichlet_dofs(space, tag, value)
        dofs.append(d)
        vals.append(v)
    sys_ = constrain(SparseSystem(A, np.zeros(space.dim)), np.concatenate(dofs), np.concatenate(vals))
    if not np.any(sys_.rhs):
        return np.zeros(space.dim)
    return solve_sparse(sys_)


def make_liftings(mesh: Mesh, data: BoundaryData, spaces: Optional[forms.TaylorHood] = None) -> Liftings:
    """Discrete harmonic extensions of the inlet data.

    The velocity lifting takes ``u_in`` on the inlet and 0 on the wall (the
    wall wins at shared corners); the temperature lifting takes ``T_in`` on
    the inlet.  Everything else is natural.
    """
    data.validate(mesh)
    th = spaces or forms.taylor_hood(mesh)
    lu = _laplace_extension(th.velocity, [(INLET, data.u_in), (WALL, 0.0)])
    lt = _laplace_extension(th.temperature, [(INLET, data.T_in)])
    return Liftings(DiscreteField(th.velocity, lu), DiscreteField(th.temperature, lt))


def _identity(mesh: Mesh) -> PullBack:
    return pullback(mesh)


def stokes_dirichlet(th: forms.TaylorHood) -> np.ndarray:
    return dirichlet_dofs(th.velocity, [INLET, WALL])[0]


def temperature_dirichlet(th: forms.TaylorHood) -> np.ndarray:
    return dirichlet_dofs(th.temperature, [INLET])[0]


def solve_stokes(mesh: Mesh, params: PhysicalParams, lift_u: DiscreteField,
                 kernels: Optional[PullBack] = None) -> tuple[DiscreteField, DiscreteField]:
    """Homogeneous velocity and pressure of the (pulled-back) Stokes system."""
    pb = kernels or _identity(mesh)
    th = forms.taylor_hood(mesh)
    M = forms.stokes_matrix(th, params.mu, pb)
    nu = th.n_u
    lift = np.concatenate([lift_u.coeffs, np.zeros(th.n_p)])
    rhs = -(M @ lift)
    sys_ = constrain(SparseSystem(M, rhs), stokes_dirichlet(th))
    if not np.any(sys_.rhs):
        x = np.zeros(nu + th.n_p)
    else:
        x = solve_sparse(sys_)
    return DiscreteField(th.velocity, x[:nu]), DiscreteField(th.pressure, x[nu:])


def max_peclet(mesh: Mesh, params: PhysicalParams, u_vals: np.ndarray) -> float:
    speed = np.sqrt((u_vals ** 2).sum(-1)).max(axis=1)
    h = np.sqrt(2 * mesh.areas)
    return float((params.rho_cp * speed * h / (2 * params.kappa)).max(initial=0.0))


def solve_temperature(mesh: Mesh, params: PhysicalParams, u_total: DiscreteField, lift_T: DiscreteField,
                      T_wall, kernels: Optional[PullBack] = None) -> DiscreteField:
    """Homogeneous temperature of the convection-diffusion system with Robin wall."""
    pb = kernels or _identity(mesh)
    th = forms.taylor_hood(mesh)
    T_wall = as_scalar(T_wall)
    u_vals = u_total.cell_values(geometry(mesh, pb.degree))
    pe = max_peclet(mesh, params, u_vals)
    if pe > 2:
        warnings.warn(f"element Peclet number {pe:.2f} > 2; plain Galerkin may oscillate", PecletWarning,
                      stacklevel=2)
    C = forms.temperature_matrix(th, params.kappa, params.rho_cp, params.alpha, u_vals, pb)
    rhs = forms.robin_load(th, params.alpha, T_wall, pb) - C @ lift_T.coeffs
    sys_ = constrain(SparseSystem(C, rhs), temperature_dirichlet(th))
    diag = sys_.matrix.diagonal()
    if diag.min() <= 0:
        warnings.warn(f"coercivity proxy {diag.min():.3g} <= 0", CoercivityWarning, stacklevel=2)
    x = np.zeros(th.temperature.dim) if not np.any(sys_.rhs) else solve_sparse(sys_)
    return DiscreteField(th.temperature, x)


def solve_state(mesh: Mesh, params: PhysicalParams, data: BoundaryData, V: Optional[AdmissibleField] = None,
                t: float = 0.0, lifts: Optional[Liftings] = None, degree: int = DEFAULT_DEGREE) -> StateSolution:
    """Kernels of ``(V, t)``, then Stokes, then temperature."""
    pb = pullback(mesh, V, t, degree)
    lifts = lifts or make_liftings(mesh, data)
    u0, p0 = solve_stokes(mesh, params, lifts.u, pb)
    T0 = solve_temperature(mesh, params, u0 + lifts.u, lifts.T, data.T_wall, pb)
    return StateSolution(u0, p0, T0, lifts.u, lifts.T, params, data, pb)


def state_residual(U: StateSolution, kernels: Optional[PullBack] = None) -> float:
    """Max residual of the assembled system over the free test functions."""
    mesh = U.mesh
    pb = kernels or U.kernels or _identity(mesh)
    params = U.params
    th = forms.taylor_hood(mesh)
    M = forms.stokes_matrix(th, params.mu, pb)
    x = np.concatenate([U.u_total.coeffs, U.p0.coeffs])
    r_s = M @ x
    r_s[stokes_dirichlet(th)] = 0.0
    u_vals = U.u_total.cell_values(geometry(mesh, pb.degree))
    C = forms.temperature_matrix(th, params.kappa, params.rho_cp, params.alpha, u_vals, pb)
    r_t = C @ U.T_total.coeffs - forms.robin_load(th, params.alpha, U.data.T_wall, pb)
    r_t[temperature_dirichlet(th)] = 0.0
    return float(max(np.abs(r_s).max(), np.abs(r_t).max()))


def zero_state(mesh: Mesh, params: PhysicalParams, data: BoundaryData) -> StateSolution:
    th = forms.taylor_hood(mesh)
    z = lambda sp: DiscreteField(sp)  # noqa: E731
    return StateSolution(z(th.velocity), z(th.pressure), z(th.temperature), z(th.velocity), z(th.temperature),
                         params, data)

