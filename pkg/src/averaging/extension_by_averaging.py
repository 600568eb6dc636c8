"""
Extension by averaging of plane-domain boundary maps.

V(x', s) = integral of u(x' - s z) phi(z) dz over the unit ball, evaluated
pointwise by Gauss-Legendre quadrature from the piecewise-linear interpolant
of the boundary samples (the constant tail outside the window).
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import roots_legendre

from ..geometry.blocks import map_blocks
from ..geometry.projection import distance_to_manifold
from ..geometry.reach import resolve_reach
from ..models.errors import SlabTooShallow
from ..models.fields import AveragedField, Mollifier, SlabGrid
from ..models.manifolds import EmbeddedManifold
from ..models.surface_map import SurfaceMap

logger = logging.getLogger(__name__)

QUADRATURE_NODES = 16
FLOOR_FACTOR = 2.0 ** -9
HEIGHT_FACTOR = 8.0
WINDOW_FACTOR = 4.0
LEVELS_PER_NODE = 16


def build_slab(surface_map: SurfaceMap, mesh_size: int, floor_factor: float = FLOOR_FACTOR,
               height_factor: float = HEIGHT_FACTOR, window_factor: float = WINDOW_FACTOR) -> SlabGrid:
    """
    Slab over a plane map: mesh_size + 1 nodes per horizontal axis across
    [-window_factor W, window_factor W] and mesh_size / 16 geometric height
    levels from floor_factor * 2W up to height_factor * W.

    Raises:
        SlabTooShallow: If the floor is not strictly positive
    """
    if not surface_map.mesh.is_plane:
        raise ValueError("Slabs are built over plane-domain maps; transport sphere maps first")
    if floor_factor <= 0:
        raise SlabTooShallow("Slab floor must lie strictly above the boundary (h_min > 0)")
    W = surface_map.mesh.window
    horizontal = np.linspace(-window_factor * W, window_factor * W, mesh_size + 1)
    levels = max(4, mesh_size // LEVELS_PER_NODE)
    heights = np.geomspace(floor_factor * 2 * W, height_factor * W, levels)
    return SlabGrid(m=surface_map.dimension, horizontal=horizontal, heights=heights)


def quadrature_rule(m: int, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Points z in the unit ball and weights (without phi) for the mollifier integral."""
    x, w = roots_legendre(nodes)
    if m == 1:
        return x[:, None], w
    r = (x + 1) / 2
    angles = 2 * np.pi * np.arange(nodes) / nodes
    rr, aa = np.meshgrid(r, angles, indexing="ij")
    points = np.stack([(rr * np.cos(aa)).ravel(), (rr * np.sin(aa)).ravel()], axis=-1)
    weights = np.outer(w / 2 * r, np.full(nodes, 2 * np.pi / nodes)).ravel()
    return points, weights


class BoundaryInterpolant:
    """Piecewise-linear interpolant of a plane map, equal to the tail outside the window."""

    def __init__(self, surface_map: SurfaceMap):
        mesh = surface_map.mesh
        self.tail = surface_map.require_tail()
        self.window = mesh.window
        self.m = mesh.dimension
        axis = np.linspace(-mesh.window, mesh.window, mesh.resolution + 1)
        self.axis = axis
        if self.m == 1:
            self.values = surface_map.values
        else:
            grid_values = surface_map.values.reshape(mesh.resolution + 1, mesh.resolution + 1, -1)
            self._interpolator = RegularGridInterpolator((axis, axis), grid_values, method="linear")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, self.m)
        if self.m == 1:
            return np.stack([np.interp(points[:, 0], self.axis, self.values[:, c],
                                       left=self.tail[c], right=self.tail[c])
                             for c in range(self.values.shape[1])], axis=-1)
        inside = np.all(np.abs(points) <= self.window, axis=1)
        result = np.broadcast_to(self.tail, (points.shape[0], self.tail.size)).copy()
        if np.any(inside):
            result[inside] = self._interpolator(points[inside])
        return result


class AveragingOperator:
    """
    Pointwise evaluator of the extension by averaging.

    Args:
        surface_map: Plane-domain map with a constant tail
        mollifier: Verified mollifier of matching dimension
        nodes: Gauss-Legendre nodes per axis
        block_size: Points per evaluation block
        threads: Worker threads
    """

    def __init__(self, surface_map: SurfaceMap, mollifier: Mollifier, nodes: int = QUADRATURE_NODES,
                 block_size: int = 2048, threads: int = 1):
        if mollifier.m != surface_map.dimension:
            raise ValueError(f"Mollifier dimension {mollifier.m} does not match map dimension {surface_map.dimension}")
        self.map = surface_map
        self.mollifier = mollifier
        self.m = mollifier.m
        self.interpolant = BoundaryInterpolant(surface_map)
        self.block_size = block_size
        self.threads = threads
        self._rules = {n: self._rule(n) for n in (nodes, 2 * nodes)}
        self.nodes = nodes

    def _rule(self, nodes: int):
        z, w = quadrature_rule(self.m, nodes)
        weights = w * self.mollifier(z)
        # Exact normalization makes V a convex combination of boundary values.
        return z, weights / math.fsum(weights)

    def _evaluate(self, points: np.ndarray, nodes: int) -> np.ndarray:
        z, weights = self._rules[nodes]

        def block(rows: range) -> np.ndarray:
            chunk = points[rows.start:rows.stop]
            base, height = chunk[:, :self.m], chunk[:, self.m]
            samples = base[:, None, :] - height[:, None, None] * z[None, :, :]
            values = self.interpolant(samples.reshape(-1, self.m)).reshape(chunk.shape[0], z.shape[0], -1)
            return np.einsum("q,kqv->kv", weights, values)

        blocks = map_blocks(block, points.shape[0], self.block_size, self.threads)
        return np.concatenate(blocks, axis=0) if blocks else np.zeros((0, self.map.values.shape[1]))

    def __call__(self, points) -> np.ndarray:
        """
        V at half-space points of shape (k, m + 1).

        Raises:
            SlabTooShallow: If a point has non-positive height
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if np.any(points[:, self.m] <= 0):
            raise SlabTooShallow("The averaged field is defined for positive heights only")
        return self._evaluate(points, self.nodes)

    def error_estimate(self, points) -> float:
        """Sup difference between the base rule and the doubled rule."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return float(np.max(np.abs(self._evaluate(points, self.nodes) - self._evaluate(points, 2 * self.nodes)),
                            initial=0.0))

    def trace_error(self, height: float) -> float:
        """L1 distance on the window between V(., height) and u."""
        mesh = self.map.mesh
        points = np.hstack([mesh.points, np.full((mesh.node_count, 1), height)])
        gap = np.linalg.norm(self(points) - self.map.values, axis=1)
        return math.fsum(mesh.weights * gap)


def distance_field(field: AveragedField, manifold: EmbeddedManifold) -> AveragedField:
    """
    Fill dist(V, N) per node; nodes whose distance is only a sampled bound or
    that lie beyond the reach are flagged as outside the tube.
    """
    flat = field.values.reshape(-1, field.values.shape[-1])
    distances, exact = distance_to_manifold(manifold, flat)
    reach = resolve_reach(manifold)
    field.dist_field = distances.reshape(field.slab.shape)
    field.outside_tube = (~exact | (distances >= reach)).reshape(field.slab.shape)
    return field


def average_extend(surface_map: SurfaceMap, mollifier: Mollifier, slab: SlabGrid,
                   manifold: Optional[EmbeddedManifold] = None, threads: int = 1,
                   error_samples: int = 512) -> AveragedField:
    """
    Sample the extension by averaging on a slab grid.

    Args:
        surface_map: Plane-domain map with constant tail
        mollifier: Mollifier of the map's dimension
        slab: Target slab grid
        manifold: When given, the distance field is filled as well
        threads: Worker threads
        error_samples: Nodes used for the doubled-rule error estimate

    Raises:
        SlabTooShallow: If the slab floor is not positive
        TailNotConstant: If the map has no tail marker
    """
    if slab.h_min <= 0:
        raise SlabTooShallow("Slab floor must be positive")
    operator = AveragingOperator(surface_map, mollifier, threads=threads)
    coordinates = slab.coordinates()
    values = operator(coordinates).reshape(slab.shape + (surface_map.values.shape[1],))
    stride = max(1, coordinates.shape[0] // error_samples)
    error = operator.error_estimate(coordinates[::stride])
    logger.debug(f"Averaged field on {slab.node_count} nodes, quadrature error {error:.3g}")
    field = AveragedField(slab=slab, values=values, mollifier_id=mollifier.identifier,
                          evaluate=operator, quadrature_error=error)
    if manifold is not None:
        distance_field(field, manifold)
    return field
