"""
Nearest-point projection, distance to the manifold and tube membership.
"""

import logging
from typing import Tuple

import numpy as np

from ..models.errors import NoConvergence, NotOnManifold, OutsideTube
from ..models.manifolds import ANALYTIC_BACKEND, EmbeddedManifold
from .reach import resolve_reach

logger = logging.getLogger(__name__)

MESH_TOLERANCE = 1e-8


def _points(manifold: EmbeddedManifold, z) -> np.ndarray:
    points = np.atleast_2d(np.asarray(z, dtype=float))
    if points.shape[-1] != manifold.ambient_dim:
        raise ValueError(f"Expected points in R^{manifold.ambient_dim}, got shape {points.shape}")
    return points


def _uses_analytic(manifold: EmbeddedManifold) -> bool:
    return manifold.projection_backend == ANALYTIC_BACKEND


def distance_to_manifold(manifold: EmbeddedManifold, z) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distance from ambient points to the manifold.

    Returns:
        (distances, exact) where ``exact`` is False for points whose distance
        is only the best sampled distance (sampled backends outside the tube)
    """
    points = _points(manifold, z)
    if _uses_analytic(manifold):
        return manifold.analytic_distance(points), np.ones(points.shape[0], dtype=bool)

    reach = resolve_reach(manifold)
    distances = manifold.sampled_distance(points)
    exact = distances < reach
    if np.any(exact):
        try:
            nearest = manifold.sampled_projection(points[exact])
            distances = distances.copy()
            distances[exact] = np.minimum(distances[exact],
                                          np.linalg.norm(points[exact] - nearest, axis=1))
        except (OutsideTube, NoConvergence) as e:
            logger.warning(f"Falling back to sampled distances: {e}")
            exact[:] = False
    return distances, exact


def project(manifold: EmbeddedManifold, z) -> np.ndarray:
    """
    Nearest point on the manifold.

    Args:
        manifold: Target manifold
        z: Ambient points, shape (k, nu) or (nu,)

    Returns:
        Projected points, shape (k, nu)

    Raises:
        OutsideTube: If any point is at distance >= reach
        NoConvergence: If the sampled backend fails to stabilize
    """
    points = _points(manifold, z)
    reach = resolve_reach(manifold)
    if _uses_analytic(manifold):
        distances = manifold.analytic_distance(points)
    else:
        distances = manifold.sampled_distance(points)
    if np.any(distances >= reach):
        worst = int(np.argmax(distances))
        raise OutsideTube(f"Point {points[worst].tolist()} is at distance {distances[worst]:.6g} "
                          f">= reach {reach:.6g} of {manifold.kind}")
    if _uses_analytic(manifold):
        projected = manifold.analytic_projection(points)
    else:
        projected = manifold.sampled_projection(points)
    if not np.all(np.isfinite(projected)):
        raise NoConvergence(f"Projection onto {manifold.kind} produced non-finite points")
    return projected


def tube_membership(manifold: EmbeddedManifold, z, margin: float) -> np.ndarray:
    """
    Whether dist(z, M) <= margin for each point.

    Raises:
        ValueError: If margin is not in (0, reach)
    """
    reach = resolve_reach(manifold)
    if not 0 < margin < reach:
        raise ValueError(f"Tube margin must lie in (0, {reach}), got {margin}")
    distances, _ = distance_to_manifold(manifold, z)
    return distances <= margin


def assert_on_manifold(manifold: EmbeddedManifold, z, tolerance: float = MESH_TOLERANCE,
                       what: str = "points") -> None:
    """
    Raises:
        NotOnManifold: If any point is farther than tolerance from the manifold
    """
    distances, _ = distance_to_manifold(manifold, z)
    if distances.size and np.max(distances) > tolerance:
        worst = int(np.argmax(distances))
        raise NotOnManifold(f"{what} {worst} is at distance {distances[worst]:.3g} from {manifold.kind} "
                            f"(tolerance {tolerance:g})")
