"""
TubedExtension - singular extensions of manifold-valued boundary maps.

This package builds extensions of maps into embedded targets of positive
reach, measures the weak-type norms of their gradients and diagnoses whether
a Riemannian manifold admits a tubed Euclidean embedding.
"""

__version__ = "0.1.0"
__author__ = "TubedExtension"
