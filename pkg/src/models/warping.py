"""
Warping functions for warped cylinders R x_f S^1.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np
import sympy as sp

MAX_DERIVATIVE_ORDER = 3


@dataclass
class WarpingFunction:
    """
    A warping function f(t) given as a symbolic expression in ``t``.

    Derivatives up to order three are obtained symbolically and compiled to
    vectorized numpy callables.

    Attributes:
        expression: Expression text, e.g. ``"2 + sin(t)/4"``
        period: Optional period of f, used to pick base points and windows
    """
    expression: str
    period: float = 0.0
    _derivatives: List[Callable] = field(default_factory=list, init=False, repr=False)
    _curvature: List[Callable] = field(default_factory=list, init=False, repr=False)

    def __post_init__(self):
        """Parse the expression and build derivative oracles."""
        if not self.expression or not self.expression.strip():
            raise ValueError("Warping expression cannot be empty")

        t = sp.Symbol("t", real=True)
        try:
            f = sp.sympify(self.expression, locals={"t": t})
        except (sp.SympifyError, SyntaxError) as e:
            raise ValueError(f"Cannot parse warping expression '{self.expression}': {e}")

        unknown = f.free_symbols - {t}
        if unknown:
            raise ValueError(f"Warping expression has free symbols other than t: {unknown}")

        symbolic = [f]
        for _ in range(MAX_DERIVATIVE_ORDER + 1):
            symbolic.append(sp.diff(symbolic[-1], t))
        self._derivatives = [self._compile(t, expr) for expr in symbolic]

        # Gaussian curvature of dt^2 + f^2 dtheta^2 and its t-derivative
        curvature = sp.simplify(-symbolic[2] / f)
        self._curvature = [self._compile(t, curvature),
                           self._compile(t, sp.diff(curvature, t))]

    @staticmethod
    def _compile(t, expr) -> Callable:
        fn = sp.lambdify(t, expr, modules="numpy")

        def evaluate(values):
            values = np.asarray(values, dtype=float)
            return np.broadcast_to(np.asarray(fn(values), dtype=float), values.shape).copy()

        return evaluate

    def __call__(self, t) -> np.ndarray:
        return self._derivatives[0](t)

    def derivative(self, t, order: int = 1) -> np.ndarray:
        """Evaluate the derivative of the given order (0 to 4)."""
        if order < 0 or order > MAX_DERIVATIVE_ORDER + 1:
            raise ValueError(f"Derivative order must be in [0, {MAX_DERIVATIVE_ORDER + 1}]")
        return self._derivatives[order](t)

    def curvature(self, t) -> np.ndarray:
        """Gaussian curvature K = -f''/f of the warped metric."""
        return self._curvature[0](t)

    def curvature_derivative(self, t) -> np.ndarray:
        """Derivative dK/dt of the Gaussian curvature."""
        return self._curvature[1](t)

    def to_dict(self) -> Dict[str, object]:
        return {"expression": self.expression, "period": self.period}

    def __str__(self) -> str:
        return f"f(t) = {self.expression}"
