"""
Conformal transport between the half-space, the ball and the Poincaré ball.
"""

from .hyperbolic import (COLLAR, BallExtension, BallGrid, euclidean_distribution, extension_on_ball,
                         hyperbolic_density, hyperbolic_distribution, hyperbolic_gradient, hyperbolic_measure)
from .transport import (BALL_TO_HALF_SPACE, HALF_SPACE_TO_BALL, MobiusTransport, SphereInterpolant,
                        plane_to_sphere, polar_cap, sphere_to_plane, transport_map)

__all__ = [
    "COLLAR", "BallExtension", "BallGrid", "euclidean_distribution", "extension_on_ball",
    "hyperbolic_density", "hyperbolic_distribution", "hyperbolic_gradient", "hyperbolic_measure",
    "BALL_TO_HALF_SPACE", "HALF_SPACE_TO_BALL", "MobiusTransport", "SphereInterpolant",
    "plane_to_sphere", "polar_cap", "sphere_to_plane", "transport_map",
]
