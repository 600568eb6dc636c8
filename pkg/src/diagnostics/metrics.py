"""
Model metrics with computable geodesic-ball volumes.

Closed forms where they exist (Euclidean, hyperbolic, flat cylinder,
asymptotically Euclidean), polar quadrature for cones and lattice Dijkstra
balls for warped cylinders. Covering spaces carry only a declared
fundamental-group growth.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.special import gamma

from ..geometry.geodesic import ParameterLattice
from ..models.manifolds import WarpedCylinder
from ..models.warping import WarpingFunction

logger = logging.getLogger(__name__)

HOMOGENEOUS_BASE_POINTS = 3
WARPED_BASE_POINTS = 8
GROUP_GROWTHS = ("polynomial", "exponential", "unknown")


class ModelMetric(ABC):
    """
    A complete Riemannian model whose geodesic balls can be measured.

    Attributes:
        model: Registry name
        window: Working window of the model, if it has one
        metadata: Declared facts (bounded_geometry, fundamental_group_growth)
    """

    model = "abstract"
    default_bounded_geometry: Optional[bool] = None

    def __init__(self, window: Optional[float] = None, metadata: Optional[Dict[str, Any]] = None):
        if window is not None and window <= 0:
            raise ValueError(f"Metric window must be positive, got {window}")
        self.window = window
        self.metadata = dict(metadata or {})
        growth = self.metadata.get("fundamental_group_growth", "unknown")
        if growth not in GROUP_GROWTHS:
            raise ValueError(f"fundamental_group_growth must be one of {GROUP_GROWTHS}, got {growth}")

    @abstractmethod
    def base_points(self) -> np.ndarray:
        """Base point labels the balls are centred at."""

    @abstractmethod
    def ball_volumes(self, radii) -> np.ndarray:
        """Ball volumes, shape (base_points, radii)."""

    @property
    def bounded_geometry(self) -> Optional[bool]:
        declared = self.metadata.get("bounded_geometry")
        return bool(declared) if declared is not None else self.default_bounded_geometry

    @property
    def group_growth(self) -> str:
        return self.metadata.get("fundamental_group_growth", "unknown")

    @property
    def measurable(self) -> bool:
        return True

    def parameters(self) -> Dict[str, Any]:
        return {}

    def to_dict(self) -> Dict[str, Any]:
        return {"model": self.model, "window": self.window, "parameters": self.parameters(),
                "metadata": dict(self.metadata)}

    def __str__(self) -> str:
        return f"{self.model}({self.parameters()})"


def _radii(radii) -> np.ndarray:
    radii = np.asarray(radii, dtype=float).ravel()
    if radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("Radii must be positive and strictly increasing")
    return radii


class EuclideanMetric(ModelMetric):
    """Flat R^d: vol B(R) = omega_d R^d at every base point."""

    model = "euclidean"
    default_bounded_geometry = True

    def __init__(self, dimension: int = 2, **kwargs):
        super().__init__(**kwargs)
        if dimension < 1:
            raise ValueError("Dimension must be positive")
        self.dimension = int(dimension)

    def unit_ball_volume(self) -> float:
        return math.pi ** (self.dimension / 2) / gamma(self.dimension / 2 + 1)

    def base_points(self):
        return np.arange(HOMOGENEOUS_BASE_POINTS, dtype=float)

    def ball_volumes(self, radii):
        radii = _radii(radii)
        row = self.unit_ball_volume() * radii ** self.dimension
        return np.tile(row, (HOMOGENEOUS_BASE_POINTS, 1))

    def parameters(self):
        return {"dimension": self.dimension}


class HyperbolicMetric(ModelMetric):
    """Hyperbolic plane or space of curvature -1."""

    model = "hyperbolic"
    default_bounded_geometry = True

    def __init__(self, dimension: int = 2, **kwargs):
        super().__init__(**kwargs)
        if dimension not in (2, 3):
            raise ValueError("Hyperbolic model supports dimension 2 or 3")
        self.dimension = int(dimension)

    def base_points(self):
        return np.arange(HOMOGENEOUS_BASE_POINTS, dtype=float)

    def ball_volumes(self, radii):
        radii = _radii(radii)
        if self.dimension == 2:
            row = 4 * math.pi * np.sinh(radii / 2) ** 2
        else:
            row = math.pi * (np.sinh(2 * radii) - 2 * radii)
        return np.tile(row, (HOMOGENEOUS_BASE_POINTS, 1))

    def parameters(self):
        return {"dimension": self.dimension}


class FlatCylinderMetric(ModelMetric):
    """
    S^1_r x R. A ball of radius R is the Euclidean disc cut to the strip
    |y| <= pi r of the universal cover, so for R > pi r its area is
    2 (a sqrt(R^2 - a^2) + R^2 arcsin(a / R)) with a = pi r.
    """

    model = "flat_cylinder"
    default_bounded_geometry = True

    def __init__(self, radius: float = 1.0, **kwargs):
        super().__init__(**kwargs)
        if radius <= 0:
            raise ValueError("Cylinder radius must be positive")
        self.radius = float(radius)

    def base_points(self):
        return np.arange(HOMOGENEOUS_BASE_POINTS, dtype=float)

    def ball_volumes(self, radii):
        radii = _radii(radii)
        a = math.pi * self.radius
        wide = radii > a
        row = math.pi * radii ** 2
        R = radii[wide]
        row[wide] = 2 * (a * np.sqrt(R * R - a * a) + R * R * np.arcsin(a / R))
        return np.tile(row, (HOMOGENEOUS_BASE_POINTS, 1))

    def parameters(self):
        return {"radius": self.radius}


class ConicalMetric(ModelMetric):
    """
    Flat cone of total angle ``angle``. Balls are measured by midpoint polar
    quadrature of the developed cone from base points at distance s from the
    apex; vol B(R) ~ angle R^2 / 2.
    """

    model = "conical"
    RADIAL_CELLS = 2048
    ANGULAR_CELLS = 512

    def __init__(self, angle: float = math.pi, apex_distances=(0.0, 1.0, 2.0), **kwargs):
        super().__init__(**kwargs)
        if angle <= 0:
            raise ValueError("Cone angle must be positive")
        self.angle = float(angle)
        self.apex_distances = np.asarray(apex_distances, dtype=float)

    def base_points(self):
        return self.apex_distances.copy()

    def _distances(self, s: float, rho: np.ndarray, phi: np.ndarray) -> np.ndarray:
        straight = np.sqrt(np.maximum(s * s + rho * rho - 2 * s * rho * np.cos(phi), 0.0))
        return np.where(np.abs(phi) < math.pi, straight, s + rho)

    def ball_volumes(self, radii):
        radii = _radii(radii)
        volumes = np.zeros((self.apex_distances.size, radii.size))
        for row, s in enumerate(self.apex_distances):
            outer = radii[-1] + s
            d_rho = outer / self.RADIAL_CELLS
            d_phi = self.angle / self.ANGULAR_CELLS
            rho = (np.arange(self.RADIAL_CELLS) + 0.5) * d_rho
            phi = -self.angle / 2 + (np.arange(self.ANGULAR_CELLS) + 0.5) * d_phi
            grid_rho, grid_phi = np.meshgrid(rho, phi, indexing="ij")
            distance = self._distances(s, grid_rho, grid_phi).ravel()
            area = (grid_rho * d_rho * d_phi).ravel()
            order = np.argsort(distance)
            cumulative = np.cumsum(area[order])
            counts = np.searchsorted(distance[order], radii, side="right")
            volumes[row] = np.where(counts > 0, cumulative[np.maximum(counts - 1, 0)], 0.0)
        return volumes

    def parameters(self):
        return {"angle": self.angle, "apex_distances": self.apex_distances.tolist()}


class AsymptoticallyEuclideanMetric(ModelMetric):
    """
    The plane with extra area ``excess`` concentrated in a core of radius
    ``core_radius``: vol B_x(R) = pi R^2 + excess * clip((R - |x| + r0) / 2 r0, 0, 1).
    """

    model = "asymptotically_euclidean"
    default_bounded_geometry = True

    def __init__(self, excess: float = 1.0, core_radius: float = 1.0, **kwargs):
        super().__init__(**kwargs)
        if excess < 0 or core_radius <= 0:
            raise ValueError("Excess must be nonnegative and the core radius positive")
        self.excess = float(excess)
        self.core_radius = float(core_radius)

    def base_points(self):
        return self.core_radius * np.array([0.0, 2.0, 4.0])

    def ball_volumes(self, radii):
        radii = _radii(radii)
        r0 = self.core_radius
        offsets = self.base_points()[:, None]
        covered = np.clip((radii[None, :] - offsets + r0) / (2 * r0), 0.0, 1.0)
        return math.pi * radii[None, :] ** 2 + self.excess * covered

    def parameters(self):
        return {"excess": self.excess, "core_radius": self.core_radius}


class CoveringMetric(ModelMetric):
    """A covering space known through its declared fundamental-group growth."""

    model = "covering"

    def base_points(self):
        return np.zeros(0)

    @property
    def measurable(self) -> bool:
        return False

    def ball_volumes(self, radii):
        raise ValueError("Covering models carry a declared group growth, not ball volumes")


class WarpedCylinderMetric(ModelMetric):
    """
    R x_f S^1 with metric dt^2 + f(t)^2 dtheta^2. Ball volumes sum the area
    weights f(t) dtheta dt of lattice nodes within graph distance R of base
    points spread over one period of f.
    """

    model = "warped_cylinder"

    def __init__(self, warping: WarpingFunction, window: float = 40.0, resolution: int = 64, **kwargs):
        super().__init__(window=window, **kwargs)
        self.warping = warping
        self.resolution = int(resolution)
        self.logger = logging.getLogger(__name__)

    def base_points(self):
        if self.warping.period > 0:
            return self.warping.period * np.arange(WARPED_BASE_POINTS) / WARPED_BASE_POINTS
        return np.linspace(-self.window / 8, self.window / 8, WARPED_BASE_POINTS)

    def ball_volumes(self, radii):
        radii = _radii(radii)
        bases = self.base_points()
        if radii[-1] > self.window - np.max(np.abs(bases)):
            raise ValueError(f"Radius {radii[-1]} leaves the window {self.window} around the base points")

        lattice = ParameterLattice(WarpedCylinder(self.warping, truncation_window=self.window), self.resolution)
        rows, cols, weights = lattice.edges()
        size = lattice.node_count
        graph = coo_matrix((weights, (rows, cols)), shape=(size, size)).tocsr()

        t_axis = -self.window + lattice.spacing[1] * np.arange(lattice.counts[1])
        t_weights = np.full(t_axis.size, lattice.spacing[1])
        t_weights[[0, -1]] /= 2
        area = (self.warping(lattice.params[:, 1]) * lattice.spacing[0]
                * np.tile(t_weights, lattice.counts[0]))

        sources = np.array([int(np.argmin(np.abs(t_axis - t0))) for t0 in bases])
        self.logger.debug(f"Warped ball volumes: {size} lattice nodes, {weights.size} edges, {sources.size} bases")
        table = dijkstra(graph, directed=False, indices=sources)
        volumes = np.zeros((bases.size, radii.size))
        for row in range(bases.size):
            order = np.argsort(table[row])
            cumulative = np.cumsum(area[order])
            counts = np.searchsorted(table[row][order], radii, side="right")
            volumes[row] = np.where(counts > 0, cumulative[np.maximum(counts - 1, 0)], 0.0)
        return volumes

    def parameters(self):
        return {"warping": self.warping.expression, "resolution": self.resolution}
