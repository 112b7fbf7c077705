"""Adjoint-based shape optimization of a 2D microchannel cooler."""

from .adjoint import AdjointSolution, ObjectiveParams, solve_adjoint, solve_averaged_adjoint
from .mesh import BoundaryTag, Mesh, deform, generate_channel_array, load_msh, quality, rectangle, unit_square
from .objective import CostBreakdown, assemble_shape_gradient, cost, normalization_weights, shape_derivative
from .optimize import History, OptimizerConfig, optimize
from .state import BoundaryData, PhysicalParams, StateSolution, solve_state
from .transform import AdmissibleField, affine, bump_translation, flow_map, kernels, wall_bump

__version__ = "0.1.0"

__all__ = [
    "AdjointSolution", "AdmissibleField", "BoundaryData", "BoundaryTag", "CostBreakdown", "History", "Mesh",
    "ObjectiveParams", "OptimizerConfig", "PhysicalParams", "StateSolution", "affine", "assemble_shape_gradient",
    "bump_translation", "cost", "deform", "flow_map", "generate_channel_array", "kernels", "load_msh",
    "normalization_weights", "optimize", "quality", "rectangle", "shape_derivative", "solve_adjoint",
    "solve_averaged_adjoint", "solve_state", "unit_square", "wall_bump",
]
