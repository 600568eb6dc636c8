"""
Good/bad classification of cubes against the half-reach tube, the (tau, h)
scan and the counting-bound check.
"""

import itertools
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..energy.gagliardo import GagliardoEnergy
from ..geometry.projection import distance_to_manifold
from ..models.cubes import Cube, CubeClassification, CubeFamily
from ..models.errors import CoverageGap, EmptyRange
from ..models.fields import AveragedField, SlabGrid
from ..models.manifolds import EmbeddedManifold
from ..models.surface_map import SurfaceMap
from .families import enumerate_cubes, make_family

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 0.9
BOUNDARY_SAMPLES_PER_EDGE = 9
TAU_SAMPLES = 8
H_SAMPLES = 8


def boundary_sup_distances(cubes: List[Cube], field: AveragedField, manifold: EmbeddedManifold,
                           per_edge: int = BOUNDARY_SAMPLES_PER_EDGE) -> np.ndarray:
    """
    Sampled sup over each cube boundary of dist(V, N).

    Raises:
        CoverageGap: If a boundary leaves the slab
    """
    if field.evaluate is None:
        raise ValueError("Averaged field has no pointwise evaluator")
    samples = [cube.boundary_samples(per_edge) for cube in cubes]
    counts = [s.shape[0] for s in samples]
    points = np.concatenate(samples, axis=0)
    if not np.all(field.slab.contains(points, tolerance=1e-9 * max(field.slab.h_max, 1.0))):
        raise CoverageGap("A cube boundary leaves the slab of the averaged field")
    distances, _ = distance_to_manifold(manifold, field.evaluate(points))
    ends = np.cumsum(counts)
    return np.array([np.max(distances[end - count:end]) for count, end in zip(counts, ends)])


def classify(family: CubeFamily, field: AveragedField, manifold: EmbeddedManifold, delta_N: float,
             safety: float = SAFETY_FACTOR, per_edge: int = BOUNDARY_SAMPLES_PER_EDGE,
             cubes: Optional[List[Cube]] = None) -> CubeClassification:
    """
    Label each cube bad when the sampled boundary sup of dist(V, N) reaches
    safety * delta_N / 2.
    """
    if delta_N <= 0:
        raise ValueError("delta_N must be positive")
    cubes = cubes if cubes is not None else enumerate_cubes(family, field.slab)
    sup_distance = boundary_sup_distances(cubes, field, manifold, per_edge)
    threshold = delta_N / 2
    bad = sup_distance >= safety * threshold
    return CubeClassification(family=family, cubes=cubes, bad=bad, sup_distance=sup_distance,
                              threshold=threshold, safety=safety)


def scan_parameters(lam: float, m: int, tau_samples: int = TAU_SAMPLES,
                    h_samples: int = H_SAMPLES) -> Tuple[List[float], List[Tuple[float, ...]]]:
    """Log-midpoint tau samples in (1, lambda) and midpoint lattice offsets in [0, 1]^m."""
    taus = [lam ** ((i + 0.5) / tau_samples) for i in range(tau_samples)]
    ticks = [(i + 0.5) / h_samples for i in range(h_samples)]
    offsets = [tuple(h) for h in itertools.product(ticks, repeat=m)]
    return taus, offsets


def scan_and_classify(lam: float, field: AveragedField, manifold: EmbeddedManifold, delta_N: float,
                      safety: float = SAFETY_FACTOR, tau_samples: int = TAU_SAMPLES,
                      h_samples: int = H_SAMPLES) -> CubeClassification:
    """
    Classify every sampled (tau, h) family and keep the one with the fewest
    bad cubes (first in scan order on ties).

    The counting integral is sum over tau of (ln lambda / tau_samples) times
    the mean over h of the bad count.

    Raises:
        EmptyRange: If no sampled family has cubes inside the slab
    """
    slab: SlabGrid = field.slab
    taus, offsets = scan_parameters(lam, slab.m, tau_samples, h_samples)
    scan: Dict[Tuple[float, Tuple[float, ...]], int] = {}
    best: Optional[CubeClassification] = None
    integral = 0.0
    for tau in taus:
        counts = []
        for h in offsets:
            try:
                family = make_family(lam, tau, h, slab)
                result = classify(family, field, manifold, delta_N, safety)
            except EmptyRange:
                continue
            scan[(tau, h)] = result.bad_count
            counts.append(result.bad_count)
            if best is None or result.bad_count < best.bad_count:
                best = result
        if counts:
            integral += math.log(lam) / tau_samples * float(np.mean(counts))
    if best is None:
        raise EmptyRange(f"No (tau, h) family with lambda={lam:.4g} fits in the slab")
    best.scan = scan
    best.counting_integral = integral
    logger.info(f"Cube scan at lambda={lam:.4g}: chosen tau={best.family.tau:.4g}, h={best.family.h}, "
                f"bad cubes {best.bad_count}, counting integral {integral:.6g}")
    return best


def counting_bound_check(classification: CubeClassification, surface_map: SurfaceMap, delta_N: float,
                         eta: float, energy: Optional[GagliardoEnergy] = None) -> Dict[str, float]:
    """
    Compare the counting integral with the pair-excess integral.

    rhs / C = delta^-(m+1) * sum over pairs of (d - eta delta)_+^(m+1) |y - z|^(-2m)
    with delta = delta_N / 2; ratio = lhs / (rhs / C), 0 when both vanish.
    """
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    energy = energy or GagliardoEnergy()
    delta = delta_N / 2
    m = surface_map.dimension
    lhs = classification.counting_integral
    rhs = energy.excess_potential(surface_map, delta, eta) / delta ** (m + 1)
    if rhs > 0:
        ratio = lhs / rhs
    else:
        ratio = 0.0 if lhs == 0 else math.inf
    return {"lhs": lhs, "rhs": rhs, "ratio": ratio, "delta": delta, "eta": eta}


def fit_counting_constant(checks: List[Dict[str, float]]) -> Dict[str, object]:
    """
    Fit C on the first check with positive rhs and report the ratio of every
    later check to it.
    """
    finite = [c for c in checks if c["rhs"] > 0]
    if not finite:
        return {"C": 0.0, "relative": [], "stable": True}
    C = finite[0]["ratio"]
    relative = [c["ratio"] / C if C > 0 else 0.0 for c in finite[1:]]
    stable = all(0.5 <= r <= 2.0 for r in relative) if C > 0 else all(c["ratio"] == 0 for c in finite)
    return {"C": C, "relative": relative, "stable": stable}
