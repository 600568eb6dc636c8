"""
Factory classes for creating target manifolds and model metrics.
"""

from .manifold_factory import ManifoldFactory

__all__ = [
    'ManifoldFactory'
]
