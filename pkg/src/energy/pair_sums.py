"""
Weighted pair sums over boundary meshes for the critical Gagliardo kernel
and its truncations.

All sums run over ordered pairs i != j. There is no excluded band of
near-diagonal pairs (|x - y| < 2h); the coincident-pair mass the sums miss
is restored by the Richardson step in ``gagliardo``. Plane-domain maps add the pairs
between window nodes and the constant tail in closed form, using
integral over |y| outside the window of |x - y|^(-2m) dy.
"""

import logging
import math
from typing import Optional

import numpy as np

from ..geometry.blocks import map_blocks
from ..geometry.geodesic import ValueDistances
from ..models.meshes import PLANE_R1_TAIL, PLANE_R2_TAIL
from ..models.surface_map import SurfaceMap

logger = logging.getLogger(__name__)

ENERGY = "energy"
TRUNCATED = "truncated"
GAP = "gap"
EXCESS = "excess"
KERNELS = (ENERGY, TRUNCATED, GAP, EXCESS)

TAIL_DIRECTIONS = 512
ZERO_DISTANCE = 1e-9


def kernel_numerator(d: np.ndarray, m: int, kernel: str, delta: Optional[float] = None,
                     eta: Optional[float] = None) -> np.ndarray:
    """
    Value-side factor of the kernel; the domain factor is |x - y|^(-2m).

    energy: d^(m+1); truncated: d^(m+1) on d >= delta; gap: 1 on d >= delta;
    excess: (d - eta delta)_+^(m+1).
    """
    if kernel == ENERGY:
        return d ** (m + 1)
    if delta is None or delta <= 0:
        raise ValueError(f"Kernel '{kernel}' needs a positive delta")
    if kernel == TRUNCATED:
        return np.where(d >= delta, d ** (m + 1), 0.0)
    if kernel == GAP:
        return np.where(d >= delta, 1.0, 0.0)
    if kernel == EXCESS:
        if eta is None or not 0 < eta < 1:
            raise ValueError("Excess kernel needs eta in (0, 1)")
        return np.maximum(d - eta * delta, 0.0) ** (m + 1)
    raise ValueError(f"Unknown kernel: {kernel}")


def tail_integral(points: np.ndarray, window: float, m: int) -> np.ndarray:
    """
    Integral of |x - y|^(-2m) over y outside the window, for window nodes x.

    In polar coordinates about x this is the mean over directions of
    rho^(-m) / m times |S^(m-1)|, with rho the exit distance of the ray.
    """
    if m == 1:
        x = points[:, 0]
        with np.errstate(divide="ignore"):
            return 1.0 / (window - x) + 1.0 / (window + x)
    angles = 2 * np.pi * (np.arange(TAIL_DIRECTIONS) + 0.5) / TAIL_DIRECTIONS
    directions = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        exits = np.where(directions[None, :, :] > 0,
                         (window - points[:, None, :]) / directions[None, :, :],
                         np.where(directions[None, :, :] < 0,
                                  (-window - points[:, None, :]) / directions[None, :, :], np.inf))
        rho = np.min(exits, axis=-1)
        return (2 * np.pi / TAIL_DIRECTIONS) * np.sum(rho ** (-m) / m, axis=1)


class PairSumEvaluator:
    """
    Evaluates kernel pair sums of one surface map in deterministic row blocks.

    Args:
        surface_map: Map to evaluate
        threads: Worker threads
        block_size: Rows per block
        distances: Precomputed value distances (shared across refinements)
    """

    def __init__(self, surface_map: SurfaceMap, threads: int = 1, block_size: int = 256,
                 distances: Optional[ValueDistances] = None):
        self.map = surface_map
        self.mesh = surface_map.mesh
        self.m = surface_map.dimension
        self.threads = threads
        self.block_size = block_size
        self.distances = distances or ValueDistances(surface_map.manifold, surface_map.values)
        self.logger = logging.getLogger(__name__)
        self._tail_distance = None
        self._tail_weight = None

    def kernel_block(self, rows: range, kernel: str, delta=None, eta=None) -> np.ndarray:
        """Kernel values K(i, j) for rows i against all j, zero on the diagonal."""
        points = self.mesh.points
        diff = points[rows.start:rows.stop, None, :] - points[None, :, :]
        r = np.sqrt(np.sum(diff * diff, axis=-1))
        numerator = kernel_numerator(self.distances.rows(rows), self.m, kernel, delta, eta)
        block = np.zeros_like(r)
        off = r > 0
        block[off] = numerator[off] / r[off] ** (2 * self.m)
        return block

    def interior(self, kernel: str, delta=None, eta=None) -> float:
        weights = self.mesh.weights

        def block_sum(rows: range) -> float:
            values = self.kernel_block(rows, kernel, delta, eta)
            return float(np.sum(weights[rows.start:rows.stop, None] * values * weights[None, :]))

        return math.fsum(map_blocks(block_sum, self.mesh.node_count, self.block_size, self.threads))

    def tail(self, kernel: str, delta=None, eta=None) -> float:
        if self.mesh.domain not in (PLANE_R1_TAIL, PLANE_R2_TAIL):
            return 0.0
        tail_value = self.map.require_tail()
        if self._tail_distance is None:
            self._tail_distance = self.distances.to_point(tail_value)
            active = (self._tail_distance > ZERO_DISTANCE) & ~self.mesh.boundary_mask()
            weight = np.zeros(self.mesh.node_count)
            weight[active] = self.mesh.weights[active] * tail_integral(self.mesh.points[active],
                                                                      self.mesh.window, self.m)
            self._tail_weight = weight
        numerator = kernel_numerator(self._tail_distance, self.m, kernel, delta, eta)
        return 2.0 * math.fsum(self._tail_weight * numerator)

    def total(self, kernel: str, delta=None, eta=None) -> float:
        """Interior pair sum plus the analytic tail contribution."""
        if self.mesh.is_plane:
            self.map.require_tail()
        return self.interior(kernel, delta, eta) + self.tail(kernel, delta, eta)
