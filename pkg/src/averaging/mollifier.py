"""
Polynomial mollifiers with verified normalization bounds.
"""

import logging
import math

import numpy as np
from scipy.special import roots_legendre

from ..models.errors import BoundViolation
from ..models.fields import Mollifier

logger = logging.getLogger(__name__)

SUP_LIMIT = 1.0
GRAD_LIMIT = 2.0
INTEGRAL_TOLERANCE = 1e-10

# phi(z) = c (1 - |z|^2)^2 on the unit ball
PROFILE_CONSTANTS = {1: 15.0 / 16.0, 2: 3.0 / math.pi}


def mollifier_integral(mollifier: Mollifier, nodes: int = 16) -> float:
    """Integral of phi over R^m by Gauss-Legendre quadrature on the support."""
    x, w = roots_legendre(nodes)
    if mollifier.m == 1:
        return float(np.sum(w * mollifier.radial(np.abs(x))))
    r = (x + 1) / 2
    return float(2 * np.pi * np.sum(w / 2 * r * mollifier.radial(r)))


def verify_bounds(mollifier: Mollifier, samples: int = 20001) -> Mollifier:
    """
    Check the four normalization bounds and record them on the mollifier.

    Raises:
        BoundViolation: If integral, support, sup or gradient bound fails
    """
    r = np.linspace(0.0, 1.0, samples)
    integral = mollifier_integral(mollifier)
    sup_value = float(np.max(np.abs(mollifier.radial(r))))
    grad_value = float(np.max(np.abs(mollifier.radial_derivative(r))))
    edge = float(abs(np.polynomial.polynomial.polyval(1.0, mollifier.profile)))

    if abs(integral - 1.0) > INTEGRAL_TOLERANCE:
        raise BoundViolation(f"Mollifier integral is {integral:.12g}, expected 1")
    if edge > 1e-12:
        raise BoundViolation(f"Mollifier profile does not vanish on the unit sphere ({edge:.3g})")
    if sup_value > SUP_LIMIT:
        raise BoundViolation(f"Mollifier sup {sup_value:.6g} exceeds {SUP_LIMIT}")
    if grad_value > GRAD_LIMIT:
        raise BoundViolation(f"Mollifier gradient sup {grad_value:.6g} exceeds {GRAD_LIMIT}")

    mollifier.integral = integral
    mollifier.sup_bound = sup_value
    mollifier.grad_bound = grad_value
    return mollifier


def build_mollifier(m: int, scale: float = 1.0) -> Mollifier:
    """
    Build the fixed mollifier for dimension m.

    Args:
        m: Domain dimension, 1 or 2
        scale: Multiplier of the profile (1 gives the normalized mollifier)

    Raises:
        BoundViolation: If the scaled profile violates a bound
    """
    if m not in PROFILE_CONSTANTS:
        raise ValueError(f"Mollifiers are defined for m in {sorted(PROFILE_CONSTANTS)}, got {m}")
    c = scale * PROFILE_CONSTANTS[m]
    mollifier = verify_bounds(Mollifier(m=m, profile=(c, -2 * c, c)))
    logger.debug(f"Mollifier m={m}: integral {mollifier.integral:.12g}, sup {mollifier.sup_bound:.4g}, "
                 f"grad {mollifier.grad_bound:.4g}")
    return mollifier
