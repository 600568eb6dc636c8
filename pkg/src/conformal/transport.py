"""
Möbius transport between the upper half-space and the unit ball.

The inversion in the sphere of radius sqrt(2) about p = -e_(m+1), followed by
the reflection of the last coordinate, maps the upper half-space onto the
open unit ball and its boundary hyperplane onto the unit sphere minus the
north pole (inverse stereographic projection). Infinity goes to the north
pole, so plane maps with a constant tail become sphere maps constant on a
polar cap.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..averaging.extension_by_averaging import BoundaryInterpolant
from ..geometry.projection import project
from ..models.errors import PoleOnSupport
from ..models.meshes import (PLANE_R1_TAIL, PLANE_R2_TAIL, POINCARE_BOUNDARY, SPHERE_S1, SPHERE_S2,
                             build_mesh)
from ..models.surface_map import TAIL_TOLERANCE, SurfaceMap

logger = logging.getLogger(__name__)

HALF_SPACE_TO_BALL = "half_space_to_ball"
BALL_TO_HALF_SPACE = "ball_to_half_space"
DIRECTIONS = (HALF_SPACE_TO_BALL, BALL_TO_HALF_SPACE)

POLE_TOLERANCE = 1e-15
MIN_CAP_CELLS = 2


@dataclass
class MobiusTransport:
    """
    The fixed half-space/ball Möbius pair in R^dimension.

    Attributes:
        direction: half_space_to_ball or ball_to_half_space
        dimension: Ambient dimension m + 1
    """
    direction: str
    dimension: int

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"Unknown transport direction: {self.direction}")
        if self.dimension not in (2, 3):
            raise ValueError(f"Transport dimension must be 2 or 3, got {self.dimension}")

    @property
    def pole(self) -> np.ndarray:
        p = np.zeros(self.dimension)
        p[-1] = -1.0
        return p

    def _invert(self, points: np.ndarray) -> np.ndarray:
        offset = points - self.pole
        return self.pole + 2 * offset / np.sum(offset * offset, axis=-1, keepdims=True)

    @staticmethod
    def _reflect(points: np.ndarray) -> np.ndarray:
        reflected = points.copy()
        reflected[..., -1] = -reflected[..., -1]
        return reflected

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[-1] != self.dimension:
            raise ValueError(f"Expected points in R^{self.dimension}, got shape {points.shape}")
        if self.direction == HALF_SPACE_TO_BALL:
            return self._reflect(self._invert(points))
        return self._invert(self._reflect(points))

    def inverse(self) -> "MobiusTransport":
        other = BALL_TO_HALF_SPACE if self.direction == HALF_SPACE_TO_BALL else HALF_SPACE_TO_BALL
        return MobiusTransport(other, self.dimension)

    def conformal_factor(self, points) -> np.ndarray:
        """Scale of the differential at each source point."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        source = points if self.direction == HALF_SPACE_TO_BALL else self._reflect(points)
        return 2.0 / np.sum((source - self.pole) ** 2, axis=-1)

    def jacobian(self, points, step: float = 1e-6) -> np.ndarray:
        """Central-difference Jacobians, shape (k, dimension, dimension)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        columns = []
        for axis in range(self.dimension):
            shift = np.zeros(self.dimension)
            shift[axis] = step
            columns.append((self(points + shift) - self(points - shift)) / (2 * step))
        return np.stack(columns, axis=-1)


def plane_to_sphere(points: np.ndarray) -> np.ndarray:
    """Boundary hyperplane R^m to the unit sphere S^m."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lifted = np.hstack([points, np.zeros((points.shape[0], 1))])
    return MobiusTransport(HALF_SPACE_TO_BALL, points.shape[1] + 1)(lifted)


def sphere_to_plane(points: np.ndarray) -> np.ndarray:
    """Unit sphere minus the north pole to the boundary hyperplane."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mapped = MobiusTransport(BALL_TO_HALF_SPACE, points.shape[1])(points)
    return mapped[:, :-1]


def polar_angle(points: np.ndarray) -> np.ndarray:
    """Angle from the north pole."""
    points = np.atleast_2d(points)
    return np.arccos(np.clip(points[:, -1] / np.linalg.norm(points, axis=1), -1.0, 1.0))


class SphereInterpolant:
    """Linear interpolant of a sphere-domain map on its latitude-longitude grid."""

    def __init__(self, surface_map: SurfaceMap):
        mesh = surface_map.mesh
        self.m = mesh.dimension
        self.values = surface_map.values
        if self.m == 1:
            self.theta = mesh.params[:, 0]
        else:
            n = mesh.resolution
            self.polar = np.pi * np.arange(1, n) / n
            azimuth = 2 * np.pi * np.arange(2 * n + 1) / (2 * n)
            grid = surface_map.values.reshape(n - 1, 2 * n, -1)
            grid = np.concatenate([grid, grid[:, :1]], axis=1)
            self._interpolator = RegularGridInterpolator((self.polar, azimuth), grid, method="linear")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.m == 1:
            angles = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * np.pi)
            return np.stack([np.interp(angles, self.theta, self.values[:, c], period=2 * np.pi)
                             for c in range(self.values.shape[1])], axis=-1)
        polar = np.clip(polar_angle(points), self.polar[0], self.polar[-1])
        azimuth = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * np.pi)
        return self._interpolator(np.stack([polar, azimuth], axis=-1))


def _evaluator(surface_map: SurfaceMap) -> Callable[[np.ndarray], np.ndarray]:
    """Exact source when available, otherwise the projected linear interpolant."""
    if surface_map.source is not None:
        return surface_map.source
    interpolant = (BoundaryInterpolant(surface_map) if surface_map.mesh.is_plane
                   else SphereInterpolant(surface_map))
    return lambda points: project(surface_map.manifold, interpolant(points))


def _to_sphere(surface_map: SurfaceMap, resolution: int, domain: Optional[str]) -> SurfaceMap:
    m = surface_map.dimension
    tail = surface_map.require_tail()
    window = surface_map.mesh.window
    evaluate = _evaluator(surface_map)
    domain = domain or (SPHERE_S1 if m == 1 else SPHERE_S2)

    def source(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values = np.broadcast_to(tail, (points.shape[0], tail.size)).copy()
        north = np.zeros(points.shape[1])
        north[-1] = 1.0
        away = np.linalg.norm(points - north, axis=1) > POLE_TOLERANCE
        if np.any(away):
            base = sphere_to_plane(points[away])
            inside = np.all(np.abs(base) <= window, axis=1)
            rows = np.flatnonzero(away)[inside]
            if rows.size:
                values[rows] = evaluate(base[inside])
        return values

    mesh = build_mesh(domain, resolution, dimension=m)
    return SurfaceMap(surface_map.name, mesh, source(mesh.points), surface_map.manifold,
                      L_bound=surface_map.L_bound, source=source, tags=surface_map.tags + ["transported"])


def polar_cap(surface_map: SurfaceMap) -> tuple:
    """
    Largest node angle phi_c such that the map is constant on the closed cap
    of that angle around the north pole, with the constant value.

    Raises:
        PoleOnSupport: If the constant cap is narrower than two mesh cells
    """
    mesh = surface_map.mesh
    angles = polar_angle(mesh.points)
    nearest = int(np.argmin(angles))
    value = surface_map.values[nearest]
    differs = np.linalg.norm(surface_map.values - value, axis=1) > TAIL_TOLERANCE
    if not np.any(differs):
        return math.pi / 2, value
    limit = float(np.min(angles[differs]))
    cap = angles[(angles < limit) & ~differs]
    phi_c = float(np.max(cap)) if cap.size else 0.0
    if phi_c < MIN_CAP_CELLS * mesh.spacing:
        raise PoleOnSupport(f"Map '{surface_map.name}' is not constant around the north pole "
                            f"(constant cap {phi_c:.4g} rad, need {MIN_CAP_CELLS * mesh.spacing:.4g})")
    return phi_c, value


def _to_plane(surface_map: SurfaceMap, resolution: int) -> SurfaceMap:
    m = surface_map.dimension
    phi_c, tail = polar_cap(surface_map)
    window = 1.0 / math.tan(phi_c / 2)
    evaluate = _evaluator(surface_map)

    def source(points: np.ndarray) -> np.ndarray:
        # pulled back everywhere; beyond the window this agrees with the tail up to TAIL_TOLERANCE
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return evaluate(plane_to_sphere(points))

    mesh = build_mesh(PLANE_R1_TAIL if m == 1 else PLANE_R2_TAIL, resolution, window=window)
    logger.debug(f"Transported '{surface_map.name}' to the plane with window {window:.6g}")
    return SurfaceMap(surface_map.name, mesh, source(mesh.points), surface_map.manifold, tail_value=tail,
                      L_bound=surface_map.L_bound, source=source, tags=surface_map.tags + ["transported"])


def transport_map(surface_map: SurfaceMap, direction: str, resolution: Optional[int] = None,
                  domain: Optional[str] = None) -> SurfaceMap:
    """
    Compose a boundary map with the boundary Möbius change of variables.

    Args:
        surface_map: Plane map with tail (half_space_to_ball) or sphere map
            (ball_to_half_space)
        direction: half_space_to_ball or ball_to_half_space
        resolution: Target mesh resolution; defaults to the source's
        domain: Sphere-side domain (sphere or Poincare boundary)

    Raises:
        TailNotConstant: If a plane map declares no tail
        PoleOnSupport: If a sphere map is not constant near the north pole
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"Unknown transport direction: {direction}")
    resolution = resolution or surface_map.mesh.resolution
    if direction == HALF_SPACE_TO_BALL:
        if not surface_map.mesh.is_plane:
            raise ValueError(f"Map '{surface_map.name}' is not a plane map")
        if domain not in (None, SPHERE_S1, SPHERE_S2, POINCARE_BOUNDARY):
            raise ValueError(f"Cannot transport onto domain {domain}")
        return _to_sphere(surface_map, resolution, domain)
    if surface_map.mesh.is_plane:
        raise ValueError(f"Map '{surface_map.name}' is not a sphere map")
    return _to_plane(surface_map, resolution)
