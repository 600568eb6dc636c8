"""
Hyperbolic measures on the Poincaré ball and extensions evaluated on it.

The ball carries g_hyp = 4 g_eucl / (1 - |x|^2)^2, whose volume density is
(2 / (1 - |x|^2))^d in dimension d. The density is not integrable up to the
boundary sphere, so every computation excludes the collar |x| > 1 - collar.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..extension.distribution import HYPERBOLIC, LEBESGUE, distribution, gradient_magnitude
from ..models.errors import BoundaryTouch
from ..models.meshes import is_power_of_two
from ..models.reports import DistributionReport
from .transport import BALL_TO_HALF_SPACE, HALF_SPACE_TO_BALL, MobiusTransport

logger = logging.getLogger(__name__)

COLLAR = 2.0 ** -6


def hyperbolic_density(points) -> np.ndarray:
    """
    Volume density of the Poincaré metric at points of the open ball.

    Raises:
        BoundaryTouch: If a point lies on or outside the unit sphere
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    squared = np.sum(points * points, axis=1)
    if np.any(squared >= 1.0):
        raise BoundaryTouch("Hyperbolic density evaluated on or outside the unit sphere")
    return (2.0 / (1.0 - squared)) ** points.shape[1]


@dataclass
class BallGrid:
    """
    Cell-centred Cartesian grid of [-1, 1]^dimension restricted to the ball.

    Attributes:
        dimension: Ambient dimension m + 1 (2 or 3)
        resolution: Cells per axis, a power of two
        collar: Width of the excluded boundary shell
    """
    dimension: int
    resolution: int
    collar: float = COLLAR

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError(f"Ball dimension must be 2 or 3, got {self.dimension}")
        if not is_power_of_two(self.resolution) or self.resolution < 4:
            raise ValueError(f"Ball grid resolution must be a power of two >= 4, got {self.resolution}")
        if not 0 < self.collar < 1:
            raise ValueError(f"Collar must lie in (0, 1), got {self.collar}")

    @property
    def spacing(self) -> float:
        return 2.0 / self.resolution

    @property
    def axis(self) -> np.ndarray:
        return -1.0 + self.spacing * (np.arange(self.resolution) + 0.5)

    @property
    def shape(self):
        return (self.resolution,) * self.dimension

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dimension

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*([self.axis] * self.dimension), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.points(), axis=1)

    def interior(self) -> np.ndarray:
        """Cells whose centre lies inside the collar-trimmed ball."""
        return self.radii() < 1.0 - self.collar

    def euclidean_weights(self) -> np.ndarray:
        return np.where(self.interior(), self.cell_volume, 0.0)

    def hyperbolic_weights(self) -> np.ndarray:
        points = self.points()
        weights = np.zeros(points.shape[0])
        inside = np.linalg.norm(points, axis=1) < 1.0 - self.collar
        weights[inside] = self.cell_volume * hyperbolic_density(points[inside])
        return weights

    def ball(self, radius: float) -> np.ndarray:
        """Indicator of the closed Euclidean ball of the given radius."""
        return self.radii() <= radius

    def to_dict(self):
        return {"dimension": self.dimension, "resolution": self.resolution, "collar": self.collar}


def _region_mask(region, grid: BallGrid) -> np.ndarray:
    mask = np.asarray(region, dtype=bool).ravel()
    if mask.size != grid.resolution ** grid.dimension:
        raise ValueError(f"Region has {mask.size} cells, grid has {grid.resolution ** grid.dimension}")
    if np.any(mask & (grid.radii() >= 1.0 - grid.collar)):
        raise BoundaryTouch(f"Region reaches the boundary collar |x| > {1 - grid.collar:.6g}")
    return mask


def hyperbolic_measure(region, grid: BallGrid) -> float:
    """
    Hyperbolic volume of a grid region by midpoint quadrature of the density.

    Raises:
        BoundaryTouch: If the region meets the boundary collar
    """
    mask = _region_mask(region, grid)
    if not np.any(mask):
        return 0.0
    density = hyperbolic_density(grid.points()[mask])
    return math.fsum(density * grid.cell_volume)


def hyperbolic_gradient(values: np.ndarray, grid: BallGrid) -> np.ndarray:
    """|DU| in the hyperbolic metric: ((1 - |x|^2) / 2) |DU|_eucl per cell."""
    euclidean = gradient_magnitude(values, [grid.axis] * grid.dimension).ravel()
    return (1.0 - grid.radii() ** 2) / 2.0 * euclidean


def hyperbolic_distribution(values: np.ndarray, grid: BallGrid, thresholds: Optional[np.ndarray] = None,
                            region=None, singular_count: int = 0) -> DistributionReport:
    """
    Distribution of |DU|_hyp against hyperbolic volume.

    Args:
        values: U per cell, shape grid.shape + (nu,); NaN marks cells where U
            is undefined
        grid: Ball grid the values live on
        thresholds: Positive thresholds; defaults to a log grid
        region: Optional indicator restricting the measured cells
        singular_count: Singular points reported alongside

    Raises:
        BoundaryTouch: If ``region`` meets the boundary collar
    """
    weights = grid.hyperbolic_weights()
    if region is not None:
        weights = np.where(_region_mask(region, grid), weights, 0.0)
    return distribution(hyperbolic_gradient(values, grid), weights, grid.dimension - 1,
                        singular_count=singular_count, thresholds=thresholds,
                        measure=HYPERBOLIC, collar=grid.collar)


def euclidean_distribution(values: np.ndarray, grid: BallGrid, thresholds: Optional[np.ndarray] = None,
                           region=None, singular_count: int = 0) -> DistributionReport:
    """Distribution of |DU|_eucl on the collar-trimmed ball."""
    weights = grid.euclidean_weights()
    if region is not None:
        weights = np.where(_region_mask(region, grid), weights, 0.0)
    gradient = gradient_magnitude(values, [grid.axis] * grid.dimension).ravel()
    return distribution(gradient, weights, grid.dimension - 1, singular_count=singular_count,
                        thresholds=thresholds, measure=LEBESGUE, collar=grid.collar)


@dataclass
class BallExtension:
    """
    A half-space extension pulled back to the unit ball.

    Attributes:
        grid: Ball grid
        values: U(G(x)) per cell, NaN outside the collar or where U is undefined
        euclidean: Distribution of |DU| against Lebesgue measure
        hyperbolic: Distribution of |DU|_hyp against hyperbolic volume
        singular_points: Images in the ball of the half-space singular points
    """
    grid: BallGrid
    values: np.ndarray
    euclidean: DistributionReport
    hyperbolic: DistributionReport
    singular_points: List[np.ndarray] = field(default_factory=list)

    def sidecar(self):
        return {
            "grid": self.grid.to_dict(),
            "singular_points": [p.tolist() for p in self.singular_points],
            "undefined_cells": int(np.sum(np.isnan(self.values[..., 0]).ravel() & self.grid.interior())),
        }


def extension_on_ball(result, grid: BallGrid) -> BallExtension:
    """
    Evaluate an assembled half-space extension on the ball, x -> U(G(x)).

    Args:
        result: ExtensionResult carrying a pointwise evaluator
        grid: Ball grid of dimension m + 1

    Raises:
        ValueError: If the result has no evaluator or the dimensions differ
    """
    if result.evaluator is None:
        raise ValueError("Extension result carries no pointwise evaluator")
    m = result.surface_map.dimension
    if grid.dimension != m + 1:
        raise ValueError(f"Ball grid dimension {grid.dimension} does not match m + 1 = {m + 1}")

    to_half_space = MobiusTransport(BALL_TO_HALF_SPACE, grid.dimension)
    points = grid.points()
    inside = grid.interior()
    values = np.full((points.shape[0], result.surface_map.values.shape[1]), np.nan)
    values[inside] = result.evaluator(to_half_space(points[inside]))
    values = values.reshape(grid.shape + (values.shape[1],))

    undefined = int(np.sum(np.isnan(values[..., 0]).ravel() & inside))
    if undefined:
        logger.warning(f"U is undefined on {undefined} ball cells (outside the tube and every box)")

    singular = result.field.singular_points
    to_ball = MobiusTransport(HALF_SPACE_TO_BALL, grid.dimension)
    images = [row for row in to_ball(np.array(singular))] if singular else []
    logger.info(f"Evaluated U on a {grid.resolution}^{grid.dimension} ball grid, "
                f"{len(images)} singular points transported")
    return BallExtension(
        grid=grid,
        values=values,
        euclidean=euclidean_distribution(values, grid, singular_count=len(images)),
        hyperbolic=hyperbolic_distribution(values, grid, singular_count=len(images)),
        singular_points=images,
    )
