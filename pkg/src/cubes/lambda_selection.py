"""
Choice of the scale ratio lambda.

bounded: lambda = 1 + exp(2 C1 (2 K L)^(m+1) gap_potential(u, delta))
general: lambda = 1 + exp(2 C1 gagliardo_energy(u))
Both are clamped to lambda >= 2.

The factor 2 in the exponent is kept in both modes: an energy of
8 pi^2 ln 2 with C1 = 0.01 gives lambda = 1 + exp(1.0946) = 3.988, not the
1 + exp(0.5473) that dropping the factor would give.
"""

import logging
import math
from typing import Optional

from ..energy.gagliardo import GagliardoEnergy
from ..models.cubes import BOUNDED_MODE, GENERAL_MODE, LambdaChoice
from ..models.errors import MissingBound, NonFiniteEnergy
from ..models.surface_map import SurfaceMap

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_CAP = 64.0


def _one_plus_exp(exponent: float) -> float:
    try:
        return 1.0 + math.exp(exponent)
    except OverflowError:
        return math.inf


def select_lambda(mode: str, surface_map: SurfaceMap, delta: float, C1: float,
                  K: Optional[float] = None, L: Optional[float] = None,
                  energy: Optional[GagliardoEnergy] = None, gagliardo: Optional[float] = None,
                  gap: Optional[float] = None, cap: float = DEFAULT_LAMBDA_CAP) -> LambdaChoice:
    """
    Select lambda by the exponential formula of the chosen mode.

    Args:
        mode: "bounded" or "general"
        surface_map: Boundary map
        delta: Gap threshold (eta delta_N / 2)
        C1: Calibration constant
        K: Comparability constant (bounded mode)
        L: Sup bound; defaults to the map's L_bound (bounded mode)
        energy: Energy engine used when values are not supplied
        gagliardo: Precomputed Gagliardo energy (general mode)
        gap: Precomputed gap potential (bounded mode)
        cap: Cap applied when building cube families

    Raises:
        MissingBound: If bounded mode lacks L or K
        NonFiniteEnergy: If general mode is given a divergent energy
    """
    if C1 <= 0:
        raise ValueError("C1 must be positive")
    energy = energy or GagliardoEnergy()
    m = surface_map.dimension

    if mode == BOUNDED_MODE:
        L = L if L is not None else surface_map.L_bound
        if L is None:
            raise MissingBound(f"Bounded mode needs an L-infinity bound for map '{surface_map.name}'")
        if K is None:
            raise MissingBound("Bounded mode needs the comparability constant K")
        if gap is None:
            gap = energy.gap_potential(surface_map, delta)
        exponent = 2 * C1 * (2 * K * L) ** (m + 1) * gap
        choice = LambdaChoice(lam=_one_plus_exp(exponent), mode=mode, exponent_input=gap,
                              constants_used={"C1": C1, "K": K, "L": L}, exponent=exponent, cap=cap)
    elif mode == GENERAL_MODE:
        if gagliardo is None:
            result = energy.gagliardo_energy(surface_map)
            if result.divergent:
                raise NonFiniteEnergy(f"Energy of '{surface_map.name}' diverges; lambda is undefined")
            gagliardo = result.value
        if not math.isfinite(gagliardo):
            raise NonFiniteEnergy(f"Energy of '{surface_map.name}' is not finite")
        exponent = 2 * C1 * gagliardo
        choice = LambdaChoice(lam=_one_plus_exp(exponent), mode=mode, exponent_input=gagliardo,
                              constants_used={"C1": C1, "K": None, "L": None}, exponent=exponent, cap=cap)
    else:
        raise ValueError(f"Unknown lambda mode: {mode}")

    logger.info(f"Lambda ({mode}): {choice.lam:.6g} from exponent {choice.exponent:.6g}; "
                f"families use {choice.lam_used:.6g}")
    return choice
