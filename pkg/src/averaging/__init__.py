"""
Averaging package: mollifiers and the extension by averaging.
"""

from .extension_by_averaging import (AveragingOperator, BoundaryInterpolant, average_extend,
                                     build_slab, distance_field)
from .mollifier import build_mollifier, verify_bounds

__all__ = [
    'AveragingOperator',
    'BoundaryInterpolant',
    'average_extend',
    'build_slab',
    'distance_field',
    'build_mollifier',
    'verify_bounds',
]
