"""
Command-line front end orchestrating the pipeline.
"""

from .commands import CommandRunner
from .main import build_parser, main

__all__ = ['CommandRunner', 'build_parser', 'main']
