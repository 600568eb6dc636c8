"""
Singular extension: reprojection, homogeneous extension, distribution
function and estimate verification.
"""

from .assembly import (ExtensionEvaluator, ExtensionPipeline, ExtensionResult, PipelineStats, StageResult,
                       assemble)
from .boxes import BoxGrower, cube_boxes, escape_boxes, merge_boxes
from .distribution import HYPERBOLIC, LEBESGUE, distribution, gradient_magnitude, mu_at
from .homogeneous import (BoxTrace, homogeneous_extend, radial_hits, sup_gauge, trace_oscillation,
                          winding_degree)
from .reprojection import bad_cube_mask, reclassify_escapes, reproject_good, tube_escapes
from .verification import EstimateSample, fit_constants, verify_estimate

__all__ = [
    "ExtensionEvaluator", "ExtensionPipeline", "ExtensionResult", "PipelineStats", "StageResult", "assemble",
    "BoxGrower", "cube_boxes", "escape_boxes", "merge_boxes",
    "HYPERBOLIC", "LEBESGUE", "distribution", "gradient_magnitude", "mu_at",
    "BoxTrace", "homogeneous_extend", "radial_hits", "sup_gauge", "trace_oscillation", "winding_degree",
    "bad_cube_mask", "reclassify_escapes", "reproject_good", "tube_escapes",
    "EstimateSample", "fit_constants", "verify_estimate",
]
