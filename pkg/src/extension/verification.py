"""
Fitting and validating the constants of the weak-norm estimate.

general: weak_norm <= A exp(B energy) energy
bounded: weak_norm <= A exp(B' gap) energy

Taking logs, a = log A and B enter linearly: a + B x_i >= log(lhs_i / E_i).
The fit minimizes the total log slack over the calibration family by linear
programming; members with lhs = 0 satisfy every bound and only enter the
validation report.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from ..models.cubes import BOUNDED_MODE, MODES
from ..models.errors import FitInfeasible
from ..models.reports import EstimateVerification

logger = logging.getLogger(__name__)

ZERO_SIDE = 1e-12


@dataclass
class EstimateSample:
    """Measured sides of the estimate for one boundary map."""
    name: str
    lhs: float
    energy: float
    gap: Optional[float] = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("Estimate samples need a name")
        if self.lhs < 0 or self.energy < 0:
            raise ValueError(f"Sample '{self.name}' has a negative side")

    def exponent_input(self, mode: str) -> float:
        if mode == BOUNDED_MODE:
            if self.gap is None:
                raise ValueError(f"Sample '{self.name}' has no gap potential for bounded mode")
            return self.gap
        return self.energy

    @classmethod
    def from_result(cls, result) -> "EstimateSample":
        """Sample of an assembled extension result."""
        return cls(name=result.surface_map.name, lhs=result.distribution.weak_norm,
                   energy=result.energy.gagliardo, gap=result.energy.gap_potential)


def fit_constants(samples: Iterable[EstimateSample], mode: str,
                  linear_regime: bool = False) -> Tuple[float, float]:
    """
    Smallest-slack (A, B) reproducing the bound on every sample.

    Raises:
        FitInfeasible: If a member has a positive left side but zero energy,
            or the linear program fails
    """
    rows = [s for s in samples if s.lhs > ZERO_SIDE]
    if not rows:
        logger.info("Calibration family has only trivial members; any constants satisfy it")
        return 1.0, 0.0
    zero_energy = [s.name for s in rows if s.energy <= ZERO_SIDE]
    if zero_energy:
        raise FitInfeasible(f"Maps {zero_energy} have a positive weak norm but zero energy")

    x = np.array([s.exponent_input(mode) for s in rows])
    y = np.array([math.log(s.lhs / s.energy) for s in rows])
    n = len(rows)
    cost = np.array([n, float(np.sum(x))])
    A_ub = -np.stack([np.ones(n), x], axis=-1)
    bounds = [(None, None), (0.0, 0.0) if linear_regime else (0.0, None)]
    result = linprog(cost, A_ub=A_ub, b_ub=-y, bounds=bounds, method="highs")
    if result.status != 0:
        raise FitInfeasible(f"Constant fit failed: {result.message}")
    a, B = result.x
    # solver tolerance may leave members marginally above the bound
    a += max(0.0, float(np.max(y - a - B * x))) + 1e-12
    logger.info(f"Fitted {mode} constants on {n} maps: A={math.exp(a):.6g}, B={B:.6g}")
    return math.exp(a), float(B)


def slack(sample: EstimateSample, A: float, B: float, mode: str) -> float:
    """A exp(B x) E - lhs; nonnegative when the bound holds."""
    exponent = B * sample.exponent_input(mode)
    bound = A * math.exp(exponent) * sample.energy if exponent < 700 else math.inf
    return bound - sample.lhs


def verify_estimate(calibration: List[EstimateSample], validation: List[EstimateSample], mode: str,
                    reach: float, m: int = 1, diameter: Optional[float] = None,
                    is_compact: bool = False) -> EstimateVerification:
    """
    Fit on the calibration family and report the slack on both families.

    Args:
        calibration: Samples used to fit the constants
        validation: Disjoint samples the bound is asserted on
        mode: "general" or "bounded"
        reach: Reach of the target; an infinite reach forces B' = 0 in bounded mode
        m: Boundary dimension
        diameter: Diameter of a compact target
        is_compact: Whether the compact-target exponent is reported

    Raises:
        FitInfeasible: If the calibration family admits no constants
    """
    if mode not in MODES:
        raise ValueError(f"Unknown estimate mode: {mode}")
    overlap = {s.name for s in calibration} & {s.name for s in validation}
    if overlap:
        raise ValueError(f"Calibration and validation families share {sorted(overlap)}")
    linear = mode == BOUNDED_MODE and math.isinf(reach)
    A, B = fit_constants(calibration, mode, linear_regime=linear)

    compact_exponent = None
    if is_compact and diameter is not None and math.isfinite(reach):
        compact_exponent = (diameter / reach) ** (m + 1)

    everything = calibration + validation
    verification = EstimateVerification(
        mode=mode,
        fitted_A=A,
        fitted_B=B,
        reach_used=reach,
        lhs_weak_norm={s.name: s.lhs for s in everything},
        energy={s.name: s.energy for s in everything},
        gap={s.name: s.gap for s in everything} if mode == BOUNDED_MODE else None,
        calibration_slack={s.name: slack(s, A, B, mode) for s in calibration},
        validation_slack={s.name: slack(s, A, B, mode) for s in validation},
        linear_regime=linear,
        compact_exponent=compact_exponent,
    )
    if not verification.holds():
        failing = sorted(name for name, value in verification.validation_slack.items() if value < -1e-9)
        logger.warning(f"Estimate fails on validation maps {failing}")
    return verification
