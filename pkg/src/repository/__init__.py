"""
Repository package for boundary-map families.
"""

from .map_family_repository import CALIBRATION_TAG, VALIDATION_TAG, MapFamilyRepository

__all__ = ['CALIBRATION_TAG', 'VALIDATION_TAG', 'MapFamilyRepository']
