"""
Geometry package: projection, reach, geodesic distance and comparability.
"""

from .comparability import comparability_K
from .geodesic import ValueDistances, geodesic_distance, pairwise_geodesic
from .projection import assert_on_manifold, distance_to_manifold, project, tube_membership
from .reach import federer_reach, resolve_reach

__all__ = [
    'comparability_K',
    'ValueDistances',
    'geodesic_distance',
    'pairwise_geodesic',
    'assert_on_manifold',
    'distance_to_manifold',
    'project',
    'tube_membership',
    'federer_reach',
    'resolve_reach',
]
