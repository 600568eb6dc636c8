"""
Models package: target manifolds, meshes, boundary maps, fields and reports.
"""

from .cubes import BOUNDED_MODE, GENERAL_MODE, Cube, CubeClassification, CubeFamily, LambdaChoice
from .fields import AveragedField, Box, ExtensionField, Mollifier, SlabGrid
from .manifolds import (Circle, CliffordTorus, ConvexPatch, Cylinder, EmbeddedManifold, PointCloud, Sphere,
                        WarpedCylinder)
from .meshes import StructuredMesh, build_mesh
from .reports import (ComparabilityConstant, DistributionReport, EnergyReport, EstimateVerification, GrowthFit,
                      ReachEstimate, TubedVerdict, WarpedAdmissibility)
from .surface_map import SurfaceMap
from .warping import WarpingFunction

__all__ = [
    'BOUNDED_MODE',
    'GENERAL_MODE',
    'Cube',
    'CubeClassification',
    'CubeFamily',
    'LambdaChoice',
    'AveragedField',
    'Box',
    'ExtensionField',
    'Mollifier',
    'SlabGrid',
    'Circle',
    'CliffordTorus',
    'ConvexPatch',
    'Cylinder',
    'EmbeddedManifold',
    'PointCloud',
    'Sphere',
    'WarpedCylinder',
    'StructuredMesh',
    'build_mesh',
    'ComparabilityConstant',
    'DistributionReport',
    'EnergyReport',
    'EstimateVerification',
    'GrowthFit',
    'ReachEstimate',
    'TubedVerdict',
    'WarpedAdmissibility',
    'SurfaceMap',
    'WarpingFunction',
]
