"""
Comparability constant K between geodesic and chordal distance.
"""

import logging
from typing import Optional

import numpy as np

from ..models.errors import EmptyIntersection
from ..models.manifolds import EmbeddedManifold
from ..models.reports import ComparabilityConstant
from .geodesic import pairwise_geodesic

logger = logging.getLogger(__name__)

DEFAULT_K_SAMPLES = 256
CHORD_FLOOR = 1e-12


def comparability_K(manifold: EmbeddedManifold, L: float, sample_count: int = DEFAULT_K_SAMPLES,
                    extra_points: Optional[np.ndarray] = None) -> ComparabilityConstant:
    """
    Largest geodesic-to-chord ratio over sampled pairs inside the 2L-ball.

    Args:
        manifold: Target manifold
        L: Ambient length bound; pairs are taken inside the closed 2L-ball
        sample_count: Number of structured samples before the ball filter
        extra_points: Additional on-manifold points (e.g. map values) joined
            to the samples, so the bound holds for them by construction

    Raises:
        EmptyIntersection: If no sample lies in the 2L-ball
    """
    if L <= 0:
        raise ValueError("L must be positive")
    points, _, _ = manifold.sample(sample_count)
    if extra_points is not None:
        points = np.vstack([points, np.atleast_2d(extra_points)])
    points = np.unique(points[np.linalg.norm(points, axis=1) <= 2 * L + 1e-12], axis=0)
    if points.shape[0] == 0:
        raise EmptyIntersection(f"{manifold.kind} misses the ambient ball of radius {2 * L}")

    K = 1.0
    if points.shape[0] > 1:
        geodesic = pairwise_geodesic(manifold, points)
        chord = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
        valid = chord > CHORD_FLOOR
        K = max(1.0, float(np.max(geodesic[valid] / chord[valid])))
    logger.debug(f"Comparability constant of {manifold.kind} at L={L}: K={K:.6g} from {points.shape[0]} points")
    return ComparabilityConstant(K=K, L=L, sample_count=int(points.shape[0]))
