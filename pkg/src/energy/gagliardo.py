"""
Critical Gagliardo energy, truncated energy and gap potential.

The raw pair sum omits the coincident band, whose contribution is linear in
the mesh size for finite-energy maps. One Richardson step S(h) + (S(h) - S(2h))
restores it; the correction is clipped at zero because the omitted integrand
is nonnegative. Divergent maps are recognized by increments that stop
contracting over three refinements.
"""

import logging
import math
from dataclasses import dataclass
from typing import List

from ..geometry.geodesic import ValueDistances
from ..models.errors import NonFiniteEnergy
from ..models.reports import EnergyReport
from ..models.surface_map import SurfaceMap
from .pair_sums import ENERGY, EXCESS, GAP, TRUNCATED, PairSumEvaluator

logger = logging.getLogger(__name__)

REFINEMENTS = 3
DIVERGENCE_RATIO = 0.8
NEGLIGIBLE_INCREMENT = 1e-6


@dataclass
class RefinementResult:
    """Pair sums from the finest mesh (index 0) to the coarsest."""
    sums: List[float]
    value: float
    error_estimate: float
    divergent: bool


class GagliardoEnergy:
    """
    Quadrature of the critical Gagliardo energy of boundary maps.

    Args:
        threads: Worker threads for pair blocks
        block_size: Rows per pair block
        refinements: Number of coarsenings used for the divergence test
    """

    def __init__(self, threads: int = 1, block_size: int = 256, refinements: int = REFINEMENTS):
        self.threads = threads
        self.block_size = block_size
        self.refinements = refinements
        self.logger = logging.getLogger(__name__)

    def evaluator(self, surface_map: SurfaceMap, distances: ValueDistances = None) -> PairSumEvaluator:
        return PairSumEvaluator(surface_map, self.threads, self.block_size, distances)

    def refinement_sums(self, surface_map: SurfaceMap, distances: ValueDistances = None) -> List[float]:
        """Energy pair sums on the map's mesh and up to ``refinements`` coarsenings."""
        distances = distances or ValueDistances(surface_map.manifold, surface_map.values)
        sums = [self.evaluator(surface_map, distances).total(ENERGY)]
        mesh, indices = surface_map.mesh, None
        current = surface_map
        for level in range(self.refinements):
            try:
                coarse_mesh, coarse_indices = mesh.coarsen()
            except ValueError:
                break
            indices = coarse_indices if indices is None else indices[coarse_indices]
            current = surface_map.restrict(coarse_mesh, indices)
            sums.append(self.evaluator(current, distances.subset(indices)).total(ENERGY))
            mesh = coarse_mesh
            self.logger.debug(f"Energy of '{surface_map.name}' at level {level + 1}: {sums[-1]:.8g}")
        return sums

    @staticmethod
    def extrapolate(sums: List[float]) -> RefinementResult:
        """Richardson value, error estimate and divergence flag from refinement sums."""
        def richardson(level: int) -> float:
            return sums[level] + max(sums[level] - sums[level + 1], 0.0)

        if len(sums) == 1:
            return RefinementResult(sums, sums[0], 0.0, False)
        value = richardson(0)
        error = abs(value - richardson(1)) if len(sums) > 2 else abs(sums[0] - sums[1])

        divergent = False
        if len(sums) > 3:
            increments = [sums[i] - sums[i + 1] for i in range(3)]
            significant = increments[0] > NEGLIGIBLE_INCREMENT * max(abs(sums[0]), 1.0)
            contracting = any(increments[i + 1] <= 0 or increments[i] / increments[i + 1] < DIVERGENCE_RATIO
                              for i in range(2))
            divergent = significant and not contracting
        return RefinementResult(sums, value, error, divergent)

    def gagliardo_energy(self, surface_map: SurfaceMap, distances: ValueDistances = None) -> RefinementResult:
        """
        Critical Gagliardo energy with refinement error estimate.

        Raises:
            TailNotConstant: For plane maps without a tail marker
        """
        result = self.extrapolate(self.refinement_sums(surface_map, distances))
        if result.divergent:
            self.logger.warning(f"Energy of '{surface_map.name}' diverges under refinement: {result.sums}")
        return result

    def truncated_energy(self, surface_map: SurfaceMap, delta: float) -> float:
        """Pair sum restricted to value distances >= delta."""
        return self.evaluator(surface_map).total(TRUNCATED, delta)

    def gap_potential(self, surface_map: SurfaceMap, delta: float) -> float:
        """Sum of |x - y|^(-2m) over pairs with value distance >= delta."""
        return self.evaluator(surface_map).total(GAP, delta)

    def excess_potential(self, surface_map: SurfaceMap, delta: float, eta: float) -> float:
        """Sum of (d - eta delta)_+^(m+1) |x - y|^(-2m) over all pairs."""
        return self.evaluator(surface_map).total(EXCESS, delta, eta)

    def report(self, surface_map: SurfaceMap, delta: float, require_finite: bool = False) -> EnergyReport:
        """
        Energy report at one threshold.

        Raises:
            NonFiniteEnergy: If require_finite and the energy diverges
        """
        distances = ValueDistances(surface_map.manifold, surface_map.values)
        result = self.gagliardo_energy(surface_map, distances)
        if result.divergent and require_finite:
            raise NonFiniteEnergy(f"Gagliardo energy of '{surface_map.name}' diverges under refinement")
        evaluator = self.evaluator(surface_map, distances)
        truncated = evaluator.total(TRUNCATED, delta)
        gap = evaluator.total(GAP, delta)
        gagliardo = math.inf if result.divergent else result.value
        self.logger.info(f"Energy of '{surface_map.name}': {gagliardo:.8g} "
                         f"(error {result.error_estimate:.3g}), truncated {truncated:.6g}, gap {gap:.6g}")
        return EnergyReport(
            gagliardo=gagliardo,
            truncated=truncated,
            gap_potential=gap,
            delta=delta,
            quadrature_error_estimate=result.error_estimate,
            pair_sum=result.sums[0],
            divergent=result.divergent,
            refinement_history=result.sums,
            dimension=surface_map.dimension,
            nodes=surface_map.mesh.node_count,
        )
