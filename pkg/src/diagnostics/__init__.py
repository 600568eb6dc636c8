"""
Volume growth, warped-product admissibility and the tubed-embedding verdict.
"""

from .growth import classify_growth, declared_growth, default_radii, growth_fit
from .metrics import (AsymptoticallyEuclideanMetric, ConicalMetric, CoveringMetric, EuclideanMetric,
                      FlatCylinderMetric, HyperbolicMetric, ModelMetric, WarpedCylinderMetric)
from .verdict import tubed_verdict
from .warped import warped_admissible

__all__ = [
    "classify_growth", "declared_growth", "default_radii", "growth_fit",
    "AsymptoticallyEuclideanMetric", "ConicalMetric", "CoveringMetric", "EuclideanMetric",
    "FlatCylinderMetric", "HyperbolicMetric", "ModelMetric", "WarpedCylinderMetric",
    "tubed_verdict",
    "warped_admissible",
]
