"""
Loaders package: spec files, boundary map files, builtin maps and artifact writers.
"""

from .artifact_writer import ArtifactWriter, module_versions
from .builtin_maps import BUILTIN_MAPS, builtin_map, family_repository, is_builtin
from .map_io import load_point_cloud_csv, read_map_header, read_surface_map, write_surface_map
from .spec_loader import SpecLoader

__all__ = [
    'ArtifactWriter',
    'module_versions',
    'BUILTIN_MAPS',
    'builtin_map',
    'family_repository',
    'is_builtin',
    'load_point_cloud_csv',
    'read_map_header',
    'read_surface_map',
    'write_surface_map',
    'SpecLoader',
]
