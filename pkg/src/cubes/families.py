"""
Enumeration of lambda-adic cube families inside a slab.

Generation k has edge e = tau lambda^(-k) and occupies heights
[e / (lambda - 1), e lambda / (lambda - 1)], so consecutive generations stack
without gaps and the family fills the half-space like a Whitney
decomposition. Horizontally the cubes sit on the shifted lattice e (Z^m + h).
"""

import itertools
import logging
import math
from typing import List, Tuple

import numpy as np

from ..models.cubes import Cube, CubeFamily
from ..models.errors import EmptyRange
from ..models.fields import SlabGrid

logger = logging.getLogger(__name__)

MIN_EDGE_IN_CELLS = 4


def generation_range(lam: float, tau: float, slab: SlabGrid,
                     min_edge_cells: int = MIN_EDGE_IN_CELLS) -> Tuple[int, int]:
    """
    Generations whose layer lies inside [h_min, h_max] and whose edge spans at
    least ``min_edge_cells`` horizontal grid cells.

    Raises:
        EmptyRange: If no generation qualifies
    """
    cell = float(slab.horizontal[1] - slab.horizontal[0])
    min_edge = min_edge_cells * cell
    # top of layer k: tau lam^(-k) lam / (lam - 1) <= h_max
    k_low = math.ceil(math.log(tau * lam / ((lam - 1) * slab.h_max)) / math.log(lam) - 1e-12)
    # bottom of layer k: tau lam^(-k) / (lam - 1) >= h_min, and edge >= min_edge
    k_high_floor = math.floor(math.log(tau / ((lam - 1) * slab.h_min)) / math.log(lam) + 1e-12)
    k_high_edge = math.floor(math.log(tau / min_edge) / math.log(lam) + 1e-12)
    k_high = min(k_high_floor, k_high_edge)
    if k_low > k_high:
        raise EmptyRange(f"No cube generation fits in heights [{slab.h_min:.4g}, {slab.h_max:.4g}] "
                         f"with lambda={lam:.4g}, tau={tau:.4g}")
    return k_low, k_high


def make_family(lam: float, tau: float, h, slab: SlabGrid) -> CubeFamily:
    """Cube family with the generation range fitted to the slab."""
    return CubeFamily(lam=lam, tau=tau, k_range=generation_range(lam, tau, slab), h=h, m=slab.m)


def enumerate_cubes(family: CubeFamily, slab: SlabGrid) -> List[Cube]:
    """
    All cubes of the family contained in the slab box.

    Raises:
        EmptyRange: If no cube fits
    """
    cubes: List[Cube] = []
    window = slab.window
    offset = np.asarray(family.h)
    for k in family.generations:
        edge = family.edge(k)
        bottom, top = family.layer(k)
        if bottom < slab.h_min * (1 - 1e-12) or top > slab.h_max * (1 + 1e-12):
            continue
        per_axis = []
        for axis in range(family.m):
            first = math.ceil(-window / edge - offset[axis] - 1e-12)
            last = math.floor(window / edge - offset[axis] - 1 + 1e-12)
            per_axis.append(range(first, last + 1))
        for index in itertools.product(*per_axis):
            lower = np.append(edge * (np.asarray(index) + offset), bottom)
            cubes.append(Cube(k=k, index=tuple(int(i) for i in index), lower=lower, edge=edge))
    if not cubes:
        raise EmptyRange(f"Family {family.to_dict()} has no cube inside the slab")
    logger.debug(f"Enumerated {len(cubes)} cubes for lambda={family.lam:.4g}, tau={family.tau:.4g}, "
                 f"generations {family.k_range}")
    return cubes
