"""
The tubed-embedding criterion: bounded geometry plus uniformly polynomial
growth is sufficient; exponential growth rules a tubed embedding out.
"""

import logging
from typing import Optional

from ..models.reports import (EXPONENTIAL, POLYNOMIAL, VERDICT_NO, VERDICT_UNKNOWN, VERDICT_YES, GrowthFit,
                              TubedVerdict, WarpedAdmissibility)

logger = logging.getLogger(__name__)


def _flag(value: Optional[bool]) -> str:
    if value is None:
        return "unknown"
    return "yes" if value else "no"


def tubed_verdict(growth: Optional[GrowthFit], admissibility: Optional[WarpedAdmissibility] = None,
                  bounded_geometry: Optional[bool] = None, group_growth: str = "unknown") -> TubedVerdict:
    """
    Combine growth and bounded-geometry evidence into a verdict.

    Args:
        growth: Volume-growth fit, or None when no volumes were measured
        admissibility: Warped-product admissibility; overrides the declared flag
        bounded_geometry: Declared 1-bounded geometry of a model
        group_growth: Declared fundamental-group growth of a covering

    Returns:
        yes when geometry is bounded and growth polynomial, no when growth is
        exponential, unknown otherwise
    """
    geometry = admissibility.verdict if admissibility is not None else bounded_geometry
    classification = growth.classification if growth is not None else "unmeasured"
    conditions = {
        "volume_growth": classification,
        "fundamental_group_growth": group_growth,
        "bounded_geometry": _flag(geometry),
        "bounded_geometry_source": ("warped_admissibility" if admissibility is not None
                                    else "declared" if bounded_geometry is not None else "none"),
    }
    if admissibility is not None and admissibility.violations:
        conditions["violated_bounds"] = ",".join(admissibility.violations)

    exponential = classification == EXPONENTIAL or group_growth == "exponential"
    polynomial = classification == POLYNOMIAL or (growth is None and group_growth == "polynomial")
    if exponential:
        verdict = VERDICT_NO
    elif geometry and polynomial:
        verdict = VERDICT_YES
    else:
        verdict = VERDICT_UNKNOWN
    logger.info(f"Tubed verdict: {verdict} ({conditions})")
    return TubedVerdict(verdict=verdict, conditions=conditions)
