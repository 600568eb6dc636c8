"""
Bad regions: seeding, merging and growing the boxes that receive a
homogeneous extension.

Seeds are the bad cubes of the chosen family and one cell around every
connected group of grid nodes whose averaged value left the half-reach tube.
Boxes that touch are merged into their bounding box; a box face whose
sampled averaged field reaches safety * delta_N is pushed outward, except the
floor face, where the boundary map supplies the trace.
"""

import logging
import math
from typing import Iterable, List

import numpy as np
from scipy import ndimage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..geometry.projection import distance_to_manifold
from ..models.cubes import Cube
from ..models.errors import InvariantViolation
from ..models.fields import AveragedField, Box, SlabGrid
from ..models.manifolds import EmbeddedManifold

logger = logging.getLogger(__name__)

GROWTH_FRACTION = 0.25
MAX_GROWTH_STEPS = 50
FACE_SAFETY = 0.9
MIN_FACE_SAMPLES = 9
MAX_FACE_SAMPLES = {1: 65, 2: 33}


def cube_boxes(cubes: Iterable[Cube]) -> List[Box]:
    return [Box(cube.lower, cube.upper) for cube in cubes]


def escape_boxes(escaped: np.ndarray, slab: SlabGrid) -> List[Box]:
    """One box per connected group of escaped nodes, padded by one grid cell."""
    labels, count = ndimage.label(escaped, structure=np.ones((3,) * escaped.ndim, dtype=bool))
    if count == 0:
        return []
    axes = slab.axes
    boxes = []
    for region in ndimage.find_objects(labels):
        lower = [axis[max(sl.start - 1, 0)] for axis, sl in zip(axes, region)]
        upper = [axis[min(sl.stop, axis.size - 1)] for axis, sl in zip(axes, region)]
        boxes.append(Box(lower, upper))
    logger.debug(f"{int(np.sum(escaped))} escaped nodes in {count} groups")
    return boxes


def merge_boxes(boxes: List[Box]) -> List[Box]:
    """Replace every connected group of touching boxes by its bounding box."""
    while len(boxes) > 1:
        lower = np.stack([b.lower for b in boxes])
        upper = np.stack([b.upper for b in boxes])
        touch = (np.all(lower[:, None, :] <= upper[None, :, :], axis=2)
                 & np.all(lower[None, :, :] <= upper[:, None, :], axis=2))
        count, labels = connected_components(csr_matrix(touch), directed=False)
        if count == len(boxes):
            break
        seeds = np.array([b.seeds for b in boxes])
        boxes = [Box(lower[labels == k].min(axis=0), upper[labels == k].max(axis=0),
                     seeds=int(seeds[labels == k].sum())) for k in range(count)]
    return sorted(boxes, key=lambda b: tuple(b.lower))


class BoxGrower:
    """
    Grows boxes until their boundaries lie inside the half-reach tube.

    Args:
        field: Averaged field with a pointwise evaluator
        manifold: Target manifold
        delta_N: Half the reach
        safety: Faces are safe while dist(V, N) < safety * delta_N
        growth: Fraction of the edge added on an unsafe side
        max_steps: Growth iterations before giving up
    """

    def __init__(self, field: AveragedField, manifold: EmbeddedManifold, delta_N: float,
                 safety: float = FACE_SAFETY, growth: float = GROWTH_FRACTION,
                 max_steps: int = MAX_GROWTH_STEPS):
        if field.evaluate is None:
            raise ValueError("Averaged field has no pointwise evaluator")
        self.field = field
        self.manifold = manifold
        self.delta_N = delta_N
        self.safety = safety
        self.growth = growth
        self.max_steps = max_steps
        self.m = field.slab.m
        self.floor = field.slab.h_min
        self.cell = float(field.slab.horizontal[1] - field.slab.horizontal[0])
        self.logger = logging.getLogger(__name__)

    def per_edge(self, box: Box) -> int:
        cells = math.ceil(float(np.max(box.upper - box.lower)) / self.cell) + 1
        return int(min(max(cells, MIN_FACE_SAMPLES), MAX_FACE_SAMPLES[self.m]))

    def is_floor_face(self, box: Box, axis: int, side: int) -> bool:
        return axis == self.m and side == 0 and box.lower[axis] <= self.floor * (1 + 1e-9)

    def unsafe_faces(self, box: Box) -> List[tuple]:
        """(axis, side) of every face whose sampled V reaches the safety threshold."""
        per_edge = self.per_edge(box)
        faces, samples = [], []
        for axis in range(self.m + 1):
            for side in (0, 1):
                if self.is_floor_face(box, axis, side):
                    continue
                faces.append((axis, side))
                samples.append(box.face_samples(axis, side, per_edge))
        counts = [s.shape[0] for s in samples]
        distances, _ = distance_to_manifold(self.manifold, self.field.evaluate(np.concatenate(samples)))
        ends = np.cumsum(counts)
        limit = self.safety * self.delta_N
        return [face for face, count, end in zip(faces, counts, ends)
                if np.max(distances[end - count:end]) >= limit]

    def expand(self, box: Box, faces: List[tuple]) -> Box:
        lower, upper = box.lower.copy(), box.upper.copy()
        size = upper - lower
        for axis, side in faces:
            if side:
                upper[axis] += self.growth * size[axis]
            elif axis == self.m:
                lower[axis] = max(lower[axis] - self.growth * size[axis], self.floor)
            else:
                lower[axis] -= self.growth * size[axis]
        return Box(lower, upper, seeds=box.seeds)

    def grow(self, boxes: List[Box]) -> List[Box]:
        """
        Raises:
            InvariantViolation: If boxes are still unsafe after max_steps
        """
        for step in range(self.max_steps):
            boxes = merge_boxes(boxes)
            grown = []
            changed = 0
            for box in boxes:
                faces = self.unsafe_faces(box)
                if faces:
                    changed += 1
                    box = self.expand(box, faces)
                grown.append(box)
            self.logger.debug(f"Box growth step {step}: {len(boxes)} boxes, {changed} grown")
            if not changed:
                return boxes
            boxes = grown
        raise InvariantViolation("box-boundary-in-tube",
                                 f"{len(boxes)} boxes still leave the tube after {self.max_steps} growth steps")
