"""
Homogeneous extension of a box boundary trace with respect to the barycentre.

Inside a box with barycentre c and half-sizes r, a point x is pushed along
the ray from c to the boundary hit y = c + (x - c) / |(x - c) / r|_inf and
receives the trace value there, so U is constant on rays and has a point
singularity at c.
"""

import logging
import math
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from ..geometry.projection import MESH_TOLERANCE, distance_to_manifold, project
from ..models.errors import BoundaryNotOnManifold
from ..models.fields import Box
from ..models.manifolds import EmbeddedManifold
from ..models.surface_map import SurfaceMap

logger = logging.getLogger(__name__)

Trace = Callable[[np.ndarray], np.ndarray]

FLOOR_TOLERANCE = 1e-9
WINDING_SAMPLES = 256


class BoxTrace:
    """
    Trace of U on box boundaries: the reprojected averaged field above the
    slab floor, the boundary map itself on the floor.

    Args:
        evaluate: Pointwise evaluator of V
        surface_map: Plane-domain boundary map
        manifold: Target manifold
        delta_N: Half the reach; trace points must stay inside this tube
        floor: Slab floor height h_min
    """

    def __init__(self, evaluate: Callable[[np.ndarray], np.ndarray], surface_map: SurfaceMap,
                 manifold: EmbeddedManifold, delta_N: float, floor: float):
        self.evaluate = evaluate
        self.map = surface_map
        self.manifold = manifold
        self.delta_N = delta_N
        self.floor = floor
        self.m = surface_map.dimension
        self.tail = surface_map.require_tail()
        self._tree = cKDTree(surface_map.mesh.points)
        self.floor_hits = 0
        self.logger = logging.getLogger(__name__)

    def on_floor(self, points: np.ndarray) -> np.ndarray:
        return points[:, self.m] <= self.floor * (1 + FLOOR_TOLERANCE)

    def boundary_values(self, points: np.ndarray) -> np.ndarray:
        """u at the nearest mesh node, the tail outside the window."""
        base = points[:, :self.m]
        _, nearest = self._tree.query(base)
        values = self.map.values[nearest].copy()
        outside = np.any(np.abs(base) > self.map.mesh.window, axis=1)
        values[outside] = self.tail
        return values

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """
        Raises:
            BoundaryNotOnManifold: If V leaves the half-reach tube at a trace point
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values = np.empty((points.shape[0], self.tail.size))
        floor = self.on_floor(points)
        if np.any(floor):
            values[floor] = self.boundary_values(points[floor])
            self.floor_hits += int(np.sum(floor))
        above = ~floor
        if np.any(above):
            averaged = self.evaluate(points[above])
            distances, _ = distance_to_manifold(self.manifold, averaged)
            if np.max(distances) >= self.delta_N:
                worst = int(np.argmax(distances))
                raise BoundaryNotOnManifold(
                    f"Trace point {points[above][worst].tolist()} has V at distance "
                    f"{distances[worst]:.4g} >= delta_N = {self.delta_N:.4g}")
            values[above] = project(self.manifold, averaged)
        return values


def sup_gauge(box: Box, points: np.ndarray) -> np.ndarray:
    """|(x - c) / r|_inf for every point."""
    return np.max(np.abs((np.atleast_2d(points) - box.barycenter) / box.half_sizes), axis=1)


def radial_hits(box: Box, points: np.ndarray) -> np.ndarray:
    """
    Boundary points hit by the rays from the barycentre through ``points``.
    The barycentre itself is sent to the centre of the bottom face.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    c, r = box.barycenter, box.half_sizes
    gauge = sup_gauge(box, points)
    centre = gauge <= 1e-14
    hits = np.empty_like(points)
    hits[~centre] = c + (points[~centre] - c) / gauge[~centre, None]
    bottom = c.copy()
    bottom[-1] -= r[-1]
    hits[centre] = bottom
    return hits


def homogeneous_extend(box: Box, trace: Trace, points: np.ndarray,
                       manifold: Optional[EmbeddedManifold] = None,
                       tolerance: float = MESH_TOLERANCE) -> np.ndarray:
    """
    Values of the homogeneous extension of ``trace`` at points of the box.

    Args:
        box: Box with its barycentre as the singular point
        trace: Callable giving on-manifold values at boundary points
        points: Points inside the closed box, shape (k, m + 1)
        manifold: When given, the trace values are checked to lie on it
        tolerance: Membership tolerance

    Raises:
        BoundaryNotOnManifold: If a trace value is off the manifold
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        return np.zeros((0, 0))
    if not np.all(box.contains(points)):
        raise ValueError("Homogeneous extension is evaluated inside its box only")
    values = trace(radial_hits(box, points))
    if manifold is not None:
        distances, _ = distance_to_manifold(manifold, values)
        if np.max(distances) > tolerance:
            raise BoundaryNotOnManifold(f"Boundary trace is {np.max(distances):.3g} away from {manifold.kind}")
    return values


def boundary_samples(box: Box, per_edge: int) -> np.ndarray:
    """Sample grid on every face of the box, duplicates removed."""
    dim = box.lower.size
    faces = [box.face_samples(axis, side, per_edge) for axis in range(dim) for side in (0, 1)]
    return np.unique(np.concatenate(faces), axis=0)


def trace_oscillation(box: Box, trace: Trace, per_edge: Optional[int] = None) -> float:
    """Chordal diameter of the trace image on the sampled box boundary."""
    if per_edge is None:
        per_edge = 33 if box.lower.size == 2 else 17
    values = trace(boundary_samples(box, per_edge))
    return float(np.max(pdist(values))) if values.shape[0] > 1 else 0.0


def perimeter_loop(box: Box, samples: int = WINDING_SAMPLES) -> np.ndarray:
    """Counter-clockwise loop around a planar box, first point not repeated."""
    if box.lower.size != 2:
        raise ValueError("Perimeter loops exist for planar boxes only")
    (x0, y0), (x1, y1) = box.lower, box.upper
    s = np.linspace(0.0, 1.0, samples, endpoint=False)
    bottom = np.stack([x0 + (x1 - x0) * s, np.full_like(s, y0)], axis=-1)
    right = np.stack([np.full_like(s, x1), y0 + (y1 - y0) * s], axis=-1)
    top = np.stack([x1 - (x1 - x0) * s, np.full_like(s, y1)], axis=-1)
    left = np.stack([np.full_like(s, x0), y1 - (y1 - y0) * s], axis=-1)
    return np.concatenate([bottom, right, top, left])


def winding_degree(box: Box, trace: Trace, samples: int = WINDING_SAMPLES) -> int:
    """
    Degree of a circle-valued trace around a planar box (values in R^2,
    angles about the origin).
    """
    values = trace(perimeter_loop(box, samples))
    if values.shape[1] != 2:
        raise ValueError("Winding degrees are defined for values in R^2")
    angles = np.arctan2(values[:, 1], values[:, 0])
    closed = np.unwrap(np.append(angles, angles[0]))
    return int(round((closed[-1] - closed[0]) / (2 * math.pi)))
