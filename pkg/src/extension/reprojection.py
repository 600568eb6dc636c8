"""
Reprojection of the averaged field onto the target on the good region.
"""

import logging
from typing import Optional

import numpy as np

from ..geometry.blocks import map_blocks
from ..geometry.projection import project
from ..models.cubes import CubeClassification
from ..models.errors import TubeEscape
from ..models.fields import HOMOGENEOUS, REPROJECTED, AveragedField, ExtensionField
from ..models.manifolds import EmbeddedManifold

logger = logging.getLogger(__name__)


def bad_cube_mask(classification: CubeClassification, field: AveragedField) -> np.ndarray:
    """Grid nodes lying in a closed bad cube."""
    coordinates = field.slab.coordinates()
    covered = np.zeros(coordinates.shape[0], dtype=bool)
    for cube in classification.bad_cubes:
        covered |= cube.contains(coordinates)
    return covered.reshape(field.slab.shape)


def tube_escapes(field: AveragedField, delta_N: float) -> np.ndarray:
    """Grid nodes whose averaged value is at distance >= delta_N from the target."""
    if field.dist_field is None:
        raise ValueError("Averaged field carries no distance field")
    escaped = field.dist_field >= delta_N
    if field.outside_tube is not None:
        escaped |= field.outside_tube
    return escaped


def reclassify_escapes(classification: CubeClassification, field: AveragedField, delta_N: float) -> int:
    """
    Mark good cubes whose interior nodes leave the half-reach tube as bad.

    Returns:
        Number of cubes reclassified
    """
    escaped = tube_escapes(field, delta_N).ravel()
    if not np.any(escaped):
        return 0
    points = field.slab.coordinates()[escaped]
    changed = 0
    for i, cube in enumerate(classification.cubes):
        if not classification.bad[i] and np.any(cube.contains(points)):
            classification.bad[i] = True
            changed += 1
    if changed:
        logger.warning(f"{changed} good cubes have interior nodes outside the tube; reclassified as bad")
    return changed


def reproject_good(field: AveragedField, classification: CubeClassification, manifold: EmbeddedManifold,
                   delta_N: float, covered: Optional[np.ndarray] = None, threads: int = 1,
                   block_size: int = 4096) -> ExtensionField:
    """
    Project V onto the target at every node outside the covered region.

    Args:
        field: Averaged field with its distance field
        classification: Cube classification of the chosen family
        manifold: Target manifold
        delta_N: Half the reach
        covered: Nodes handled by homogeneous extension; defaults to the bad cubes
        threads: Worker threads
        block_size: Nodes per projection block

    Returns:
        Partial extension: covered nodes hold NaN and HOMOGENEOUS provenance

    Raises:
        TubeEscape: If a node to be reprojected is outside the half-reach tube
    """
    slab = field.slab
    if covered is None:
        covered = bad_cube_mask(classification, field)
    covered = covered.reshape(slab.shape)
    escaped = tube_escapes(field, delta_N) & ~covered
    if np.any(escaped):
        node = np.unravel_index(int(np.argmax(escaped)), slab.shape)
        raise TubeEscape(f"Node {tuple(int(i) for i in node)} of the good region is at distance "
                         f"{field.dist_field[node]:.4g} >= delta_N = {delta_N:.4g}")

    flat_values = field.values.reshape(-1, field.values.shape[-1])
    good = np.flatnonzero(~covered.ravel())
    values = np.full_like(flat_values, np.nan)

    def block(rows: range) -> np.ndarray:
        return project(manifold, flat_values[good[rows.start:rows.stop]])

    if good.size:
        values[good] = np.concatenate(map_blocks(block, good.size, block_size, threads), axis=0)
    provenance = np.where(covered, HOMOGENEOUS, REPROJECTED).astype(np.int8)
    logger.debug(f"Reprojected {good.size} of {slab.node_count} nodes")
    return ExtensionField(slab=slab, values=values.reshape(field.values.shape), provenance=provenance)
