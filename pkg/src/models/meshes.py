"""
Structured boundary meshes with quadrature weights.

Four domain families are supported: the circle and 2-sphere (also used as the
boundary of the Poincare ball) and the line and plane with a constant tail
outside a window [-W, W]^m. Every mesh can be coarsened to half resolution by
keeping every other node, which is what the refinement-based error estimates
of the energy module rely on.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

SPHERE_S1 = "sphere_S1"
SPHERE_S2 = "sphere_S2"
PLANE_R1_TAIL = "plane_R1_tail"
PLANE_R2_TAIL = "plane_R2_tail"
POINCARE_BOUNDARY = "poincare_boundary"

DOMAINS = (SPHERE_S1, SPHERE_S2, PLANE_R1_TAIL, PLANE_R2_TAIL, POINCARE_BOUNDARY)
PLANE_DOMAINS = (PLANE_R1_TAIL, PLANE_R2_TAIL)


@dataclass
class StructuredMesh:
    """
    A structured node set on a boundary domain.

    Attributes:
        domain: One of DOMAINS
        dimension: Domain dimension m
        resolution: Number of cells per axis (power of two)
        points: Node coordinates in the domain's Euclidean space, shape (k, d)
        params: Node parameters (angles or plane coordinates), shape (k, m)
        weights: Quadrature weights, shape (k,)
        spacing: Mesh size h in domain units
        window: Half-width W of the tail window for plane domains
    """
    domain: str
    dimension: int
    resolution: int
    points: np.ndarray
    params: np.ndarray
    weights: np.ndarray
    spacing: float
    window: Optional[float] = None
    grid_shape: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"Unknown mesh domain: {self.domain}")
        if self.points.shape[0] != self.weights.shape[0]:
            raise ValueError("Mesh points and weights must have equal length")
        if self.resolution < 2 or self.resolution & (self.resolution - 1):
            raise ValueError(f"Mesh resolution must be a power of two, got {self.resolution}")
        if self.is_plane and (self.window is None or self.window <= 0):
            raise ValueError("Plane domains require a positive window")

    @property
    def is_plane(self) -> bool:
        return self.domain in PLANE_DOMAINS

    @property
    def node_count(self) -> int:
        return int(self.points.shape[0])

    def boundary_mask(self) -> np.ndarray:
        """Nodes on the edge of the tail window (plane domains only)."""
        if not self.is_plane:
            return np.zeros(self.node_count, dtype=bool)
        return np.any(np.isclose(np.abs(self.params), self.window), axis=1)

    def coarsen(self) -> Tuple["StructuredMesh", np.ndarray]:
        """
        Half-resolution mesh and the indices of its nodes in this mesh.

        Raises:
            ValueError: If the mesh is already at the coarsest resolution
        """
        coarse_resolution = self.resolution // 2
        if coarse_resolution < 4:
            raise ValueError(f"Cannot coarsen a mesh of resolution {self.resolution}")
        coarse = build_mesh(self.domain, coarse_resolution, self.window, self.dimension)
        n = self.resolution
        if self.domain == SPHERE_S1 or (self.domain == POINCARE_BOUNDARY and self.dimension == 1):
            indices = 2 * np.arange(coarse_resolution)
        elif self.domain == PLANE_R1_TAIL:
            indices = 2 * np.arange(coarse_resolution + 1)
        elif self.domain == PLANE_R2_TAIL:
            i, j = np.meshgrid(np.arange(coarse_resolution + 1), np.arange(coarse_resolution + 1), indexing="ij")
            indices = (2 * i * (n + 1) + 2 * j).ravel()
        else:
            j, k = np.meshgrid(np.arange(1, coarse_resolution), np.arange(2 * coarse_resolution), indexing="ij")
            indices = ((2 * j - 1) * (2 * n) + 2 * k).ravel()
        return coarse, indices

    def to_dict(self):
        return {
            "domain": self.domain,
            "dimension": self.dimension,
            "resolution": self.resolution,
            "nodes": self.node_count,
            "spacing": self.spacing,
            "window": self.window,
        }


def circle_mesh(resolution: int, domain: str = SPHERE_S1) -> StructuredMesh:
    """Equispaced nodes on the unit circle with equal weights."""
    theta = 2 * np.pi * np.arange(resolution) / resolution
    points = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    weights = np.full(resolution, 2 * np.pi / resolution)
    return StructuredMesh(domain, 1, resolution, points, theta[:, None], weights,
                          2 * np.pi / resolution, grid_shape=(resolution,))


def sphere_mesh(resolution: int, domain: str = SPHERE_S2) -> StructuredMesh:
    """
    Latitude-longitude vertex grid on the unit 2-sphere.

    Polar nodes are dropped (their trapezoid weight vanishes); the azimuth
    direction carries twice the polar resolution.
    """
    polar = np.pi * np.arange(1, resolution) / resolution
    azimuth = 2 * np.pi * np.arange(2 * resolution) / (2 * resolution)
    grid_polar, grid_azimuth = np.meshgrid(polar, azimuth, indexing="ij")
    grid_polar, grid_azimuth = grid_polar.ravel(), grid_azimuth.ravel()
    points = np.stack([np.sin(grid_polar) * np.cos(grid_azimuth),
                       np.sin(grid_polar) * np.sin(grid_azimuth),
                       np.cos(grid_polar)], axis=-1)
    spacing = np.pi / resolution
    weights = np.sin(grid_polar) * spacing * spacing
    params = np.stack([grid_polar, grid_azimuth], axis=-1)
    return StructuredMesh(domain, 2, resolution, points, params, weights, spacing,
                          grid_shape=(resolution - 1, 2 * resolution))


def _trapezoid_weights(count: int, spacing: float) -> np.ndarray:
    weights = np.full(count, spacing)
    weights[0] = weights[-1] = spacing / 2
    return weights


def interval_mesh(resolution: int, window: float) -> StructuredMesh:
    """Vertex grid on [-W, W] with trapezoid weights."""
    x = np.linspace(-window, window, resolution + 1)
    spacing = 2 * window / resolution
    weights = _trapezoid_weights(resolution + 1, spacing)
    return StructuredMesh(PLANE_R1_TAIL, 1, resolution, x[:, None], x[:, None], weights,
                          spacing, window=window, grid_shape=(resolution + 1,))


def square_mesh(resolution: int, window: float) -> StructuredMesh:
    """Vertex grid on [-W, W]^2 with tensor trapezoid weights."""
    x = np.linspace(-window, window, resolution + 1)
    spacing = 2 * window / resolution
    w = _trapezoid_weights(resolution + 1, spacing)
    gx, gy = np.meshgrid(x, x, indexing="ij")
    points = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    weights = np.outer(w, w).ravel()
    return StructuredMesh(PLANE_R2_TAIL, 2, resolution, points, points.copy(), weights,
                          spacing, window=window, grid_shape=(resolution + 1, resolution + 1))


def build_mesh(domain: str, resolution: int, window: Optional[float] = None,
               dimension: Optional[int] = None) -> StructuredMesh:
    """
    Build a mesh for the named domain.

    Args:
        domain: One of DOMAINS
        resolution: Cells per axis, a power of two
        window: Tail half-width for plane domains
        dimension: Required for the Poincare boundary (1 or 2)
    """
    if domain == SPHERE_S1:
        return circle_mesh(resolution)
    if domain == SPHERE_S2:
        return sphere_mesh(resolution)
    if domain == PLANE_R1_TAIL:
        return interval_mesh(resolution, window)
    if domain == PLANE_R2_TAIL:
        return square_mesh(resolution, window)
    if domain == POINCARE_BOUNDARY:
        if dimension == 1:
            return circle_mesh(resolution, POINCARE_BOUNDARY)
        if dimension == 2:
            return sphere_mesh(resolution, POINCARE_BOUNDARY)
        raise ValueError("Poincare boundary meshes need dimension 1 or 2")
    raise ValueError(f"Unknown mesh domain: {domain}")


def domain_dimension(domain: str) -> int:
    if domain in (SPHERE_S1, PLANE_R1_TAIL):
        return 1
    if domain in (SPHERE_S2, PLANE_R2_TAIL):
        return 2
    raise ValueError(f"Domain dimension of {domain} depends on the mesh")


def is_power_of_two(value: int) -> bool:
    return value >= 1 and not value & (value - 1)


def total_measure(mesh: StructuredMesh) -> float:
    """Total quadrature weight, e.g. 2 pi for the circle."""
    return math.fsum(mesh.weights)
