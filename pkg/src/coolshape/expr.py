"""Closed-form scalar and vector expressions in ``x`` and ``y``.

Expressions are parsed with sympy, differentiated symbolically and compiled
to vectorized numpy callables.  Besides the usual elementary functions the
namespace provides ``bump(s)``, the C-infinity cutoff
``exp(1 - 1/(1 - s**2))`` for ``|s| < 1`` and zero elsewhere, and
``bumpsq(r)`` which is the same cutoff in terms of ``r = s**2`` (smooth
radial bumps without a square root).

>>> f = ScalarExpr("x*y + 1")
>>> f(np.array([[1.0, 2.0]]))
array([3.])
"""
from __future__ import annotations

from typing import Callable, Sequence, Union

import numpy as np
import sympy as sp

X, Y = sp.symbols("x y", real=True)


def _bump(s):
    return sp.Piecewise((sp.exp(1 - 1 / (1 - s**2)), s**2 < 1), (0, True))


def _bumpsq(r):
    return sp.Piecewise((sp.exp(1 - 1 / (1 - r)), r < 1), (0, True))


_NAMESPACE = {
    "x": X,
    "y": Y,
    "pi": sp.pi,
    "bump": _bump,
    "bumpsq": _bumpsq,
    "exp": sp.exp,
    "sin": sp.sin,
    "cos": sp.cos,
    "tanh": sp.tanh,
    "sqrt": sp.sqrt,
}


class ExpressionError(ValueError):
    pass


def _compile(expr: sp.Expr) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    fn = sp.lambdify((X, Y), expr, modules="numpy")

    def evaluate(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            out = fn(xs, ys)
        return np.broadcast_to(np.asarray(out, dtype=float), xs.shape).copy()

    return evaluate


class ScalarExpr:
    """A scalar field given by a closed-form expression with analytic gradient."""

    def __init__(self, source: Union[str, float, int, sp.Expr]):
        if isinstance(source, sp.Expr):
            expr = source
        else:
            try:
                expr = sp.sympify(str(source), locals=_NAMESPACE)
            except (sp.SympifyError, SyntaxError, TypeError) as exc:
                raise ExpressionError(f"cannot parse expression {source!r}") from exc
        free = expr.free_symbols - {X, Y}
        if free:
            names = ", ".join(sorted(str(s) for s in free))
            raise ExpressionError(f"unknown symbols in {source!r}: {names}")
        self.source = str(source)
        self.expr = expr
        self._f = _compile(expr)
        self._dx = _compile(sp.diff(expr, X))
        self._dy = _compile(sp.diff(expr, Y))

    def __repr__(self) -> str:
        return f"ScalarExpr({self.source!r})"

    @property
    def is_constant(self) -> bool:
        return not self.expr.free_symbols

    def __call__(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return self._f(p[..., 0], p[..., 1])

    def gradient(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return np.stack([self._dx(p[..., 0], p[..., 1]), self._dy(p[..., 0], p[..., 1])], axis=-1)


class VectorExpr:
    """A 2-vector field given componentwise; ``jacobian[..., i, j] = d f_i / d x_j``."""

    def __init__(self, components: Sequence[Union[str, float, int, sp.Expr]]):
        if isinstance(components, (str, bytes)) or len(components) != 2:
            raise ExpressionError("a vector expression needs exactly two components")
        self.components = tuple(ScalarExpr(c) for c in components)

    def __repr__(self) -> str:
        return f"VectorExpr({[c.source for c in self.components]!r})"

    @property
    def sources(self) -> list[str]:
        return [c.source for c in self.components]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.stack([c(points) for c in self.components], axis=-1)

    def jacobian(self, points: np.ndarray) -> np.ndarray:
        return np.stack([c.gradient(points) for c in self.components], axis=-2)


def as_scalar(value) -> ScalarExpr:
    return value if isinstance(value, ScalarExpr) else ScalarExpr(value)


def as_vector(value) -> VectorExpr:
    return value if isinstance(value, VectorExpr) else VectorExpr(value)
