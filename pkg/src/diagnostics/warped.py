"""
Admissibility of warping functions for tubed warped cylinders.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from ..models.reports import WarpedAdmissibility
from ..models.warping import MAX_DERIVATIVE_ORDER, WarpingFunction

logger = logging.getLogger(__name__)

SAMPLES_PER_UNIT = 512
MIN_SAMPLES = 8193
UNIFORM_TOLERANCE = 0.01


def _samples(half_width: float) -> np.ndarray:
    count = max(MIN_SAMPLES, int(2 * half_width * SAMPLES_PER_UNIT) + 1)
    return np.linspace(-half_width, half_width, count)


def _grows(inner: float, outer: float) -> bool:
    """Whether a sup over the doubled window exceeds the sup over the window."""
    return outer > inner * (1 + UNIFORM_TOLERANCE) + 1e-12


def warped_admissible(warping: WarpingFunction, window: float,
                      derivative_bounds: Optional[Sequence[float]] = None) -> WarpedAdmissibility:
    """
    Check 0 < a <= f <= b and bounded derivatives up to order three.

    Bounds are sampled on [-window, window] and on the doubled window; a
    bound that keeps growing when the window doubles is reported as
    unbounded. Declared derivative bounds, when given, are checked against
    the samples instead.

    Args:
        warping: Warping function with symbolic derivatives
        window: Half-width of the sampled window
        derivative_bounds: Optional declared sup|f^(k)| for k = 1..3
    """
    if window <= 0:
        raise ValueError(f"Window must be positive, got {window}")
    if derivative_bounds is not None and len(derivative_bounds) != MAX_DERIVATIVE_ORDER:
        raise ValueError(f"Declared derivative bounds need {MAX_DERIVATIVE_ORDER} entries")

    inner, outer = _samples(window), _samples(2 * window)
    violations = []

    with np.errstate(over="ignore", invalid="ignore"):
        f_inner, f_outer = warping(inner), warping(outer)
        a, b = float(np.min(f_outer)), float(np.max(f_outer))
        if not np.isfinite(a) or a <= 0 or np.min(f_outer) < np.min(f_inner) * (1 - UNIFORM_TOLERANCE):
            violations.append("a")
        if not np.isfinite(b) or _grows(float(np.max(f_inner)), b):
            violations.append("b")

        bounds = []
        for order in range(1, MAX_DERIVATIVE_ORDER + 1):
            sup_inner = float(np.max(np.abs(warping.derivative(inner, order))))
            sup_outer = float(np.max(np.abs(warping.derivative(outer, order))))
            bounds.append(sup_outer)
            if derivative_bounds is not None:
                if sup_outer > derivative_bounds[order - 1] * (1 + 1e-9):
                    violations.append(f"derivative_{order}")
            elif not np.isfinite(sup_outer) or _grows(sup_inner, sup_outer):
                violations.append(f"derivative_{order}")

        curvature = float(np.max(np.abs(warping.curvature(outer))))
        curvature_derivative = float(np.max(np.abs(warping.curvature_derivative(outer))))
        if not np.isfinite(curvature) or _grows(float(np.max(np.abs(warping.curvature(inner)))), curvature):
            violations.append("curvature")
        inner_derivative = float(np.max(np.abs(warping.curvature_derivative(inner))))
        if not np.isfinite(curvature_derivative) or _grows(inner_derivative, curvature_derivative):
            violations.append("curvature_derivative")

    embeddable = bool(np.isfinite(bounds[0]) and bounds[0] < 1.0)
    if not embeddable:
        violations.append("embeddable")

    verdict = not violations
    logger.info(f"Warping {warping.expression}: a={a:.6g}, b={b:.6g}, "
                f"{'admissible' if verdict else 'violates ' + ', '.join(violations)}")
    return WarpedAdmissibility(
        expression=warping.expression,
        window=window,
        a=a,
        b=b,
        derivative_bounds=bounds,
        curvature_sup=curvature,
        curvature_derivative_sup=curvature_derivative,
        embeddable=embeddable,
        verdict=verdict,
        violations=violations,
    )
