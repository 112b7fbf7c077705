"""Speed-method flows of admissible vector fields and the pull-back kernels.

For a field ``V`` with flow ``Phi_t`` the kernels at a point are

* ``xi    = det DPhi_t``
* ``A     = xi * DPhi_t^{-1} DPhi_t^{-T}``
* ``B     = xi * DPhi_t^{-T}``
* ``omega = xi * |DPhi_t^{-T} n|`` (boundary points with unit normal ``n``)

and their one-sided rates at ``t = 0`` are ``div V``, ``div V I - 2 eps(V)``,
``div V I - DV^T`` and ``div V - (DV n).n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .expr import VectorExpr
from .fem.field import DiscreteField
from .fem.geometry import DEFAULT_DEGREE, facet_geometry, geometry
from .mesh import BoundaryTag, Mesh

DET_FLOOR = 0.1


class DeformationTooLarge(ValueError):
    pass


class AdmissibleField:
    """Vector field with analytic Jacobian, extended by zero outside ``support``.

    ``support`` is a box ``(xmin, xmax, ymin, ymax)``; None means the whole
    plane.  Points on the box boundary count as outside.
    """

    def __init__(self, value: Callable[[np.ndarray], np.ndarray],
                 jacobian: Callable[[np.ndarray], np.ndarray],
                 support: Optional[Sequence[float]] = None, name: str = ""):
        self._value = value
        self._jacobian = jacobian
        self.support = None if support is None else tuple(float(s) for s in support)
        self.name = name

    def __repr__(self) -> str:
        return f"AdmissibleField({self.name or 'anonymous'}, support={self.support})"

    @classmethod
    def from_expression(cls, components, support=None, name: str = "") -> "AdmissibleField":
        expr = components if isinstance(components, VectorExpr) else VectorExpr(components)
        return cls(expr, expr.jacobian, support, name or str(expr.sources))

    def _inside(self, p: np.ndarray) -> np.ndarray:
        if self.support is None:
            return np.ones(p.shape[:-1], bool)
        x0, x1, y0, y1 = self.support
        return (p[..., 0] > x0) & (p[..., 0] < x1) & (p[..., 1] > y0) & (p[..., 1] < y1)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        out = np.zeros(p.shape)
        ins = self._inside(p)
        if np.any(ins):
            out[ins] = self._value(p[ins])
        return out

    def jacobian(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        out = np.zeros(p.shape + (2,))
        ins = self._inside(p)
        if np.any(ins):
            out[ins] = self._jacobian(p[ins])
        return out

    def scaled(self, a: float) -> "AdmissibleField":
        return AdmissibleField(lambda p: a * self._value(p), lambda p: a * self._jacobian(p),
                               self.support, f"{a}*{self.name}")

    def __neg__(self) -> "AdmissibleField":
        return self.scaled(-1.0)

    def __rmul__(self, a: float) -> "AdmissibleField":
        return self.scaled(a)

    def __add__(self, other: "AdmissibleField") -> "AdmissibleField":
        return AdmissibleField(lambda p: self(p) + other(p), lambda p: self.jacobian(p) + other.jacobian(p),
                               _union(self.support, other.support), f"{self.name}+{other.name}")

    def vanishing_error(self, mesh: Mesh, tags=(BoundaryTag.INLET, BoundaryTag.OUTLET),
                        degree: int = DEFAULT_DEGREE) -> float:
        """Largest |V| or |DV| entry at the quadrature points and vertices of ``tags``."""
        fg = facet_geometry(mesh, degree)
        sel = fg.mask(tags)
        pts = np.concatenate([fg.points[sel].reshape(-1, 2), mesh.vertices[mesh.tagged_vertices(tags)]])
        if len(pts) == 0:
            return 0.0
        return float(max(np.abs(self(pts)).max(), np.abs(self.jacobian(pts)).max()))

    def jacobian_error(self, points: np.ndarray, h: float = 1e-6) -> float:
        """Max deviation of the Jacobian from central differences of the values."""
        p = np.asarray(points, dtype=float)
        fd = np.empty(p.shape + (2,))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            fd[..., j] = (self(p + e) - self(p - e)) / (2 * h)
        return float(np.abs(fd - self.jacobian(p)).max())


def _union(a, b):
    if a is None or b is None:
        return None
    return (min(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), max(a[3], b[3]))


class NodalField(AdmissibleField):
    """A discrete P1/P2 vector field used as a deformation direction.

    Jacobians come from the element shape-function gradients; the field is
    zero outside the mesh.
    """

    def __init__(self, field: DiscreteField, name: str = "nodal"):
        if field.space.ncomp != 2:
            raise ValueError("a nodal deformation field must be vector valued")
        self.field = field
        super().__init__(lambda p: field(p.reshape(-1, 2), outside=0.0).reshape(p.shape),
                         lambda p: field.gradient_at(p.reshape(-1, 2)).reshape(p.shape + (2,)),
                         None, name)

    @property
    def vertex_values(self) -> np.ndarray:
        sp = self.field.space
        nv = sp.mesh.n_vertices
        return np.stack([sp.component(self.field.coeffs, 0)[:nv], sp.component(self.field.coeffs, 1)[:nv]], 1)

    def scaled(self, a: float) -> "NodalField":
        return NodalField(self.field * a, f"{a}*{self.name}")

    def __add__(self, other):
        if isinstance(other, NodalField):
            return NodalField(self.field + other.field, f"{self.name}+{other.name}")
        return super().__add__(other)


def affine(matrix, offset=(0.0, 0.0), name: str = "affine") -> AdmissibleField:
    """``V(x) = M x + c`` on the whole plane (not admissible; used by exactness checks)."""
    M = np.asarray(matrix, dtype=float)
    c = np.asarray(offset, dtype=float)
    return AdmissibleField(lambda p: p @ M.T + c, lambda p: np.broadcast_to(M, p.shape + (2,)).copy(),
                           None, name)


def bump_translation(center, radius: float, direction) -> AdmissibleField:
    """Constant ``direction`` times a radial C-infinity bump of ``radius`` around ``center``."""
    cx, cy = center
    dx, dy = direction
    r = f"((x-({cx}))**2+(y-({cy}))**2)/({radius})**2"
    bump = f"bumpsq({r})"
    return AdmissibleField.from_expression([f"({dx})*{bump}", f"({dy})*{bump}"],
                                           support=(cx - radius, cx + radius, cy - radius, cy + radius),
                                           name=f"bump_translation{tuple(center)}")


def wall_bump(x0: float, x1: float, y_wall: float, amplitude: float, depth: float) -> AdmissibleField:
    """Vertical C-infinity bump pushing the wall ``y = y_wall`` between ``x0`` and ``x1``."""
    xm, hw = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
    expr = f"({amplitude})*bump((x-({xm}))/({hw}))*bump((y-({y_wall}))/({depth}))"
    return AdmissibleField.from_expression(["0", expr], support=(x0, x1, y_wall - depth, y_wall + depth),
                                           name=f"wall_bump[{x0},{x1}]@y={y_wall}")


def zero_field() -> AdmissibleField:
    return AdmissibleField(lambda p: np.zeros(p.shape), lambda p: np.zeros(p.shape + (2,)), None, "zero")


@dataclass(frozen=True)
class FlowMap:
    field: AdmissibleField
    t: float
    n_steps: Optional[int] = None

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("pseudo-time must be non-negative; flow the negated field instead")
        if self.n_steps is None:
            object.__setattr__(self, "n_steps", max(16, math.ceil(64 * self.t)))
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")


def flow_map(field: AdmissibleField, t: float, n_steps: Optional[int] = None) -> FlowMap:
    """Flow map for signed ``t``; negative times run the flow of ``-V``."""
    return FlowMap(field, t, n_steps) if t >= 0 else FlowMap(-field, -t, n_steps)


def flow_points(F: FlowMap, points: np.ndarray) -> np.ndarray:
    """Classical RK4 integration of ``x' = V(x)`` up to ``F.t``."""
    x = np.array(points, dtype=float, copy=True)
    if F.t == 0:
        return x
    h = F.t / F.n_steps
    V = F.field
    for _ in range(F.n_steps):
        k1 = V(x)
        k2 = V(x + 0.5 * h * k1)
        k3 = V(x + 0.5 * h * k2)
        k4 = V(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def _det(M):
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def flow_jacobian(F: FlowMap, points: np.ndarray, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Mapped points and ``DPhi_t`` from RK4 on the flow plus its variational equation."""
    x = np.array(points, dtype=float, copy=True)
    M = np.broadcast_to(np.eye(2), x.shape + (2,)).copy()
    if F.t == 0:
        return x, M
    h = F.t / F.n_steps
    V = F.field

    def rhs(x_, M_):
        return V(x_), V.jacobian(x_) @ M_

    for _ in range(F.n_steps):
        k1x, k1m = rhs(x, M)
        k2x, k2m = rhs(x + 0.5 * h * k1x, M + 0.5 * h * k1m)
        k3x, k3m = rhs(x + 0.5 * h * k2x, M + 0.5 * h * k2m)
        k4x, k4m = rhs(x + h * k3x, M + h * k3m)
        x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        M = M + (h / 6.0) * (k1m + 2 * k2m + 2 * k3m + k4m)
    if check and M.size:
        dmin = float(_det(M).min())
        if dmin <= DET_FLOOR:
            raise DeformationTooLarge(f"min det DPhi_t = {dmin:.3g} <= {DET_FLOOR} at t = {F.t}")
    return x, M


@dataclass
class KernelValues:
    """Pull-back weights at a set of points (leading shape of the inputs)."""

    xi: np.ndarray
    A: np.ndarray
    B: np.ndarray
    omega: Optional[np.ndarray] = None
    points: Optional[np.ndarray] = None


def _inverse(M):
    inv = np.empty_like(M)
    d = _det(M)
    inv[..., 0, 0] = M[..., 1, 1] / d
    inv[..., 1, 1] = M[..., 0, 0] / d
    inv[..., 0, 1] = -M[..., 0, 1] / d
    inv[..., 1, 0] = -M[..., 1, 0] / d
    return inv


def kernels_from_jacobian(D: np.ndarray, normals: Optional[np.ndarray] = None) -> KernelValues:
    xi = _det(D)
    Dinv = _inverse(D)
    DinvT = np.swapaxes(Dinv, -1, -2)
    A = xi[..., None, None] * (Dinv @ DinvT)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    B = xi[..., None, None] * DinvT
    omega = None
    if normals is not None:
        n = np.broadcast_to(normals, D.shape[:-1])
        w = np.einsum("...ij,...j->...i", DinvT, n)
        omega = xi * np.hypot(w[..., 0], w[..., 1])
    return KernelValues(xi, A, B, omega)


def kernels(F: FlowMap, points: np.ndarray, normals: Optional[np.ndarray] = None) -> KernelValues:
    """Kernel values at ``points``; ``normals`` (unit, same leading shape) enable omega."""
    x, D = flow_jacobian(F, points)
    kv = kernels_from_jacobian(D, normals)
    kv.points = x
    if F.t == 0:
        eye = np.broadcast_to(np.eye(2), D.shape).copy()
        kv = KernelValues(np.ones(D.shape[:-2]), eye, eye.copy(),
                          None if normals is None else np.ones(D.shape[:-2]), x)
    return kv


@dataclass
class KernelRates:
    xi_rate: np.ndarray
    A_rate: np.ndarray
    B_rate: np.ndarray
    omega_rate: Optional[np.ndarray] = None


def kernel_rates(V: AdmissibleField, points: np.ndarray, normals: Optional[np.ndarray] = None) -> KernelRates:
    DV = V.jacobian(points)
    div = DV[..., 0, 0] + DV[..., 1, 1]
    eye = np.eye(2)
    eps = 0.5 * (DV + np.swapaxes(DV, -1, -2))
    A_rate = div[..., None, None] * eye - 2 * eps
    B_rate = div[..., None, None] * eye - np.swapaxes(DV, -1, -2)
    omega_rate = None
    if normals is not None:
        n = np.broadcast_to(normals, DV.shape[:-1])
        omega_rate = div - np.einsum("...i,...ij,...j->...", n, DV, n)
    return KernelRates(div, A_rate, B_rate, omega_rate)


# -- kernels on a mesh's quadrature points ----------------------------------

@dataclass
class PullBack:
    """Kernels on every cell and boundary-facet quadrature point of a mesh.

    Cell arrays have leading shape (nc, nq), facet arrays (nb, nqf); the
    ``points`` entries hold the mapped points ``Phi_t(x)``.
    """

    mesh: Mesh
    t: float
    field: Optional[AdmissibleField]
    cell: KernelValues
    facet: KernelValues
    degree: int = DEFAULT_DEGREE

    @property
    def is_identity(self) -> bool:
        return self.field is None or self.t == 0


def pullback(mesh: Mesh, field: Optional[AdmissibleField] = None, t: float = 0.0,
             degree: int = DEFAULT_DEGREE, n_steps: Optional[int] = None) -> PullBack:
    """Kernels of the flow of ``field`` at time ``t`` (signed) on ``mesh``."""
    geom = geometry(mesh, degree)
    fg = facet_geometry(mesh, degree)
    if field is None or t == 0:
        eye_c = np.broadcast_to(np.eye(2), geom.points.shape[:2] + (2, 2)).copy()
        cell = KernelValues(np.ones(geom.points.shape[:2]), eye_c, eye_c.copy(), None, geom.points.copy())
        facet = KernelValues(np.ones(fg.points.shape[:2]), None, None,
                             np.ones(fg.points.shape[:2]), fg.points.copy())
        return PullBack(mesh, 0.0 if field is None else t, field, cell, facet, degree)
    F = flow_map(field, t, n_steps)
    cell = kernels(F, geom.points)
    nrm = np.broadcast_to(fg.normals[:, None, :], fg.points.shape)
    facet = kernels(F, fg.points, nrm)
    return PullBack(mesh, t, field, cell, facet, degree)


def flow_mesh(mesh: Mesh, field: AdmissibleField, t: float, n_steps: Optional[int] = None,
              check_fixed: bool = False) -> Mesh:
    """The discrete transported domain: vertices moved by the RK4 flow."""
    from .mesh import deform

    moved = flow_points(flow_map(field, t, n_steps), mesh.vertices)
    return deform(mesh, moved - mesh.vertices, 1.0, check_fixed=check_fixed)
