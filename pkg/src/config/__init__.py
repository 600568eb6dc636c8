"""
Configuration management: run configuration, spec files, environment defaults.
"""

from .environment_parser import EnvironmentConfigurationParser
from .manifold_spec import ManifoldSpec, MetricSpec
from .run_configuration import COMMANDS, RunConfig

__all__ = [
    'COMMANDS',
    'EnvironmentConfigurationParser',
    'ManifoldSpec',
    'MetricSpec',
    'RunConfig',
]
