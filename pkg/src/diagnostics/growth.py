"""
Volume-growth fitting of geodesic balls.

The uniform volume V(R) = max over base points of vol B(x, R) is fitted on
the tail of the radius range. Polynomial growth shows as a stable log-log
slope; exponential growth as a log-log slope that keeps climbing while
log V is affine in R.
"""

import logging
import math
from typing import Optional

import numpy as np

from ..models.errors import InsufficientRadii, InvariantViolation
from ..models.reports import EXPONENTIAL, INCONCLUSIVE, POLYNOMIAL, GrowthFit
from .metrics import ModelMetric, WarpedCylinderMetric

logger = logging.getLogger(__name__)

MIN_TAIL_SAMPLES = 4
SLOPE_DRIFT = 0.5
VOLUME_FLOOR = 1e-300


def tail_indices(radii: np.ndarray) -> np.ndarray:
    """The upper half of the radius samples."""
    return np.arange(radii.size // 2, radii.size)


def _fit(x: np.ndarray, y: np.ndarray):
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), residual


def classify_growth(radii: np.ndarray, volumes: np.ndarray) -> GrowthFit:
    """
    Classify sampled ball volumes, shape (base_points, radii).

    Raises:
        InsufficientRadii: If the tail holds fewer than four radii
    """
    radii = np.asarray(radii, dtype=float)
    volumes = np.asarray(volumes, dtype=float)
    tail = tail_indices(radii)
    if tail.size < MIN_TAIL_SAMPLES:
        raise InsufficientRadii(f"Growth fit needs {MIN_TAIL_SAMPLES} tail radii, got {tail.size}")

    uniform = np.max(volumes, axis=0)
    log_r = np.log(radii[tail])
    log_v = np.log(np.maximum(uniform[tail], VOLUME_FLOOR))
    slope, residual = _fit(log_r, log_v)
    linear_slope, linear_residual = _fit(radii[tail], log_v)
    local = np.diff(log_v) / np.diff(log_r)
    drift = float(local[-1] - local[0])

    if drift > SLOPE_DRIFT and linear_slope > 0 and linear_residual < residual:
        classification = EXPONENTIAL
    elif abs(drift) <= SLOPE_DRIFT:
        classification = POLYNOMIAL
    else:
        classification = INCONCLUSIVE

    degree = max(0, int(round(slope)))
    envelope = (0.0, 0.0)
    if classification == POLYNOMIAL:
        envelope = (float(np.max(volumes / radii[None, :] ** degree)), 0.0)
    logger.info(f"Growth fit: {classification}, log-log slope {slope:.4f} (drift {drift:.3g}), "
                f"log-linear slope {linear_slope:.4f}")
    return GrowthFit(radii=radii, volumes=volumes, fitted_degree=degree, slope=slope,
                     fit_residual=residual if classification != EXPONENTIAL else linear_residual,
                     classification=classification, envelope=envelope)


def growth_fit(metric: ModelMetric, radii) -> GrowthFit:
    """
    Sample geodesic-ball volumes of a model metric and classify their growth.

    Args:
        metric: Model metric with computable ball volumes
        radii: Increasing positive radii

    Raises:
        InsufficientRadii: If fewer than four radii fall in the tail
        ValueError: If the metric carries no measurable volumes
    """
    radii = np.asarray(radii, dtype=float).ravel()
    if tail_indices(radii).size < MIN_TAIL_SAMPLES:
        raise InsufficientRadii(f"Growth fit needs {MIN_TAIL_SAMPLES} tail radii, got {tail_indices(radii).size}")
    if not metric.measurable:
        raise ValueError(f"Model '{metric.model}' has no measurable ball volumes")
    volumes = metric.ball_volumes(radii)
    if volumes.shape[0] < 3:
        raise ValueError(f"Uniform growth needs at least 3 base points, model '{metric.model}' gave {volumes.shape[0]}")
    fit = classify_growth(radii, volumes)
    if fit.classification == POLYNOMIAL and not fit.dominates():
        raise InvariantViolation("growth-envelope-dominance", f"model {metric.model}")
    return fit


def declared_growth(group_growth: str) -> Optional[GrowthFit]:
    """
    Growth taken from a declared fundamental-group growth of a covering.

    Polynomial and exponential group growth transfer to the volume growth of
    the universal cover; anything else yields None.
    """
    if group_growth == "polynomial":
        classification = POLYNOMIAL
    elif group_growth == "exponential":
        classification = EXPONENTIAL
    else:
        return None
    return GrowthFit(radii=np.zeros(0), volumes=np.zeros((0, 0)), fitted_degree=0, slope=math.nan,
                     fit_residual=0.0, classification=classification)


DEFAULT_RADIUS = 20.0
DEFAULT_RADIUS_COUNT = 16


def default_radii(metric: ModelMetric, count: int = DEFAULT_RADIUS_COUNT) -> np.ndarray:
    """
    Evenly spaced radii up to the largest radius the metric can measure.

    Warped cylinders stop where balls around the base points would leave the
    lattice window; other models go to the window or to R = 20.
    """
    largest = metric.window or DEFAULT_RADIUS
    if isinstance(metric, WarpedCylinderMetric):
        largest = metric.window - float(np.max(np.abs(metric.base_points())))
    if largest <= 0:
        raise InsufficientRadii(f"Window of model '{metric.model}' leaves no room for balls")
    return np.linspace(largest / count, largest, count)
