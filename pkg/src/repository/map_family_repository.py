"""
Simple in-memory repository for tagged boundary-map families.
"""

from typing import Dict, List

from ..models.surface_map import SurfaceMap

CALIBRATION_TAG = "calibration"
VALIDATION_TAG = "validation"


class MapFamilyRepository:
    """
    In-memory store of boundary maps keyed by name.

    Tags (``constant``, ``smooth``, ``step``, ``degree-one``, ``calibration``,
    ``validation``) select the families used for fitting and validating the
    estimate constants.
    """

    def __init__(self):
        """Initialize empty repository."""
        self._maps: Dict[str, SurfaceMap] = {}

    def add_map(self, surface_map: SurfaceMap) -> None:
        """
        Add a map to the repository.

        Raises:
            ValueError: If a map with the same name already exists
        """
        if surface_map.name in self._maps:
            raise ValueError(f"Map '{surface_map.name}' already exists")
        self._maps[surface_map.name] = surface_map

    def get_maps_by_tag(self, tag: str) -> List[SurfaceMap]:
        return [m for m in self._maps.values() if m.has_tag(tag)]

    def calibration_family(self) -> List[SurfaceMap]:
        return self.get_maps_by_tag(CALIBRATION_TAG)

    def validation_family(self) -> List[SurfaceMap]:
        return self.get_maps_by_tag(VALIDATION_TAG)

    def check_disjoint(self) -> None:
        """
        Raises:
            ValueError: If a map is tagged for both calibration and validation
        """
        shared = sorted(m.name for m in self.calibration_family() if m.has_tag(VALIDATION_TAG))
        if shared:
            raise ValueError(f"Maps tagged for both calibration and validation: {shared}")

    def __len__(self) -> int:
        return len(self._maps)

    def __contains__(self, name: str) -> bool:
        return name in self._maps

    def __str__(self) -> str:
        return f"MapFamilyRepository({len(self._maps)} maps)"

    def __repr__(self) -> str:
        return f"MapFamilyRepository(maps={list(self._maps.keys())})"
