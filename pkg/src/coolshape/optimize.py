"""Gradient descent on the mesh with an Armijo line search."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .adjoint import ObjectiveParams, solve_adjoint
from .mesh import InversionError, Mesh, QualityReport, deform, quality
from .objective import CostBreakdown, ShapeGradient, assemble_shape_gradient, cost
from .state import BoundaryData, Liftings, PhysicalParams, StateSolution, make_liftings, solve_state

log = logging.getLogger(__name__)

CONVERGED, STAGNATION, QUALITY, MAX_ITERS = "converged", "stagnation", "quality", "max_iters"


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 10
    initial_step: float = 1.0
    c1: float = 1e-4
    backtrack: float = 0.5
    grad_tol: float = 1e-8
    min_angle: float = 10.0
    max_t: float = 0.05
    max_backtracks: int = 30
    field_space: str = "P1v"
    mu_e: float = 1.0
    delta: float = 0.1

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.initial_step <= 0 or self.max_t <= 0:
            raise ValueError("initial_step and max_t must be positive")
        if not 0 < self.c1 < 1 or not 0 < self.backtrack < 1:
            raise ValueError("c1 and backtrack must lie in (0, 1)")
        if self.grad_tol < 0:
            raise ValueError("grad_tol must be non-negative")
        if not 0 <= self.min_angle < 60:
            raise ValueError("min_angle must lie in [0, 60)")
        if self.max_backtracks < 1 or self.mu_e <= 0 or self.delta <= 0:
            raise ValueError("max_backtracks, mu_e and delta must be positive")


@dataclass
class IterationRecord:
    iter: int
    cost: CostBreakdown
    grad_norm: float
    step: float
    quality: QualityReport

    def row(self) -> dict:
        c = self.cost
        return {"iter": self.iter, "J_total": c.total, "J_flux": c.term_flux, "J_tracking": c.term_tracking,
                "J_perimeter": c.term_perimeter, "Q": c.q_value, "grad_norm": self.grad_norm,
                "step": self.step, "min_angle": self.quality.min_angle}


@dataclass
class History:
    records: list = field(default_factory=list)
    status: str = MAX_ITERS
    mesh: Optional[Mesh] = None
    weights: Optional[tuple] = None

    @property
    def totals(self) -> list:
        return [r.cost.total for r in self.records]

    def rows(self) -> list:
        return [r.row() for r in self.records]


@dataclass
class StepResult:
    mesh: Mesh
    record: IterationRecord
    status: Optional[str]
    state: Optional[StateSolution]
    cost: Optional[CostBreakdown]
    gradient: Optional[ShapeGradient] = None
    current: Optional[StateSolution] = None


def step(mesh: Mesh, params: PhysicalParams, data: BoundaryData, obj: ObjectiveParams, cfg: OptimizerConfig,
         lifts: Liftings, state: Optional[StateSolution] = None, s_init: Optional[float] = None,
         it: int = 0) -> StepResult:
    """One descent step from ``mesh``; ``status`` is None when a step was accepted.

    The record describes the current iterate (its cost, gradient norm and
    quality) together with the step length accepted from it.
    """
    U = state or solve_state(mesh, params, data, lifts=lifts.on(mesh))
    J0 = cost(U, obj)
    qual = quality(mesh)
    P = solve_adjoint(U, obj)
    grad = assemble_shape_gradient(U, P, obj, cfg.field_space, cfg.mu_e, cfg.delta)
    gnorm = grad.norm
    if gnorm < cfg.grad_tol:
        return StepResult(mesh, IterationRecord(it, J0, gnorm, 0.0, qual), CONVERGED, U, J0, grad, U)
    d = grad.vertex_displacement()
    slope = float(grad.dual @ grad.riesz.coeffs)
    s = cfg.initial_step if s_init is None else s_init
    dmax = np.abs(d).max()
    if dmax > 0:
        s = min(s, cfg.max_t / dmax)
    for _ in range(cfg.max_backtracks):
        try:
            new = deform(mesh, d, s)
        except InversionError:
            s *= cfg.backtrack
            continue
        if quality(new).min_angle < cfg.min_angle:
            s *= cfg.backtrack
            continue
        U_new = solve_state(new, params, data, lifts=lifts.on(new))
        J_new = cost(U_new, obj)
        if J_new.total <= J0.total + cfg.c1 * s * slope and J_new.total < J0.total:
            log.info("iter %d: J %.6e -> %.6e, step %.3e", it, J0.total, J_new.total, s)
            return StepResult(new, IterationRecord(it, J0, gnorm, s, qual), None, U_new, J_new, grad, U)
        s *= cfg.backtrack
    return StepResult(mesh, IterationRecord(it, J0, gnorm, 0.0, qual), STAGNATION, U, J0, grad, U)


def optimize(mesh: Mesh, params: PhysicalParams, data: BoundaryData, obj: ObjectiveParams,
             cfg: OptimizerConfig, lifts: Optional[Liftings] = None,
             callback: Optional[Callable[[int, Mesh, StateSolution, IterationRecord], None]] = None) -> History:
    """Run up to ``cfg.max_iters`` descent steps; the history has one row per iterate visited."""
    hist = History(mesh=mesh)
    if cfg.max_iters == 0:
        return hist
    lifts = lifts or make_liftings(mesh, data)
    if quality(mesh).min_angle < cfg.min_angle:
        hist.status = QUALITY
        return hist
    state, s_prev = None, None
    for it in range(cfg.max_iters):
        s_init = None if s_prev is None else s_prev / cfg.backtrack
        res = step(mesh, params, data, obj, cfg, lifts, state, s_init, it)
        hist.records.append(res.record)
        if callback is not None:
            callback(it, mesh, res.current, res.record)
        if res.status is not None:
            hist.status = res.status
            break
        mesh, state, s_prev = res.mesh, res.state, res.record.step
    hist.mesh = mesh
    return hist


def run(config) -> History:
    """Optimize from a :class:`~coolshape.config.RunConfig` or a path to one."""
    from .config import RunConfig, load_config

    cfg = config if isinstance(config, RunConfig) else load_config(config)
    setup = cfg.build()
    return optimize(setup.mesh, setup.params, setup.data, setup.objective(), cfg.optimizer_config())
